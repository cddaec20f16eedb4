#include <gtest/gtest.h>

#include "flexkit/errors.hpp"
#include "support.hpp"

using namespace flexkit;
using testkit::fixture_path;
using testkit::load_fixture;
using testkit::read_text;

namespace {

const char* kFixtures[] = {"sfo.json", "tecfo.json", "dfo.json", "ufo.json"};

std::string expect_error(const std::string& text) {
  try {
    parse_message(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Every JSON pointer to an object member of the message.
void collect_keys(const Json& j, const Json::json_pointer& at, std::vector<Json::json_pointer>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto p = at / it.key();
      out.push_back(p);
      collect_keys(it.value(), p, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) collect_keys(j[i], at / i, out);
  }
}

}  // namespace

TEST(Codec, FixturesRoundTrip) {
  for (const char* name : kFixtures) {
    SCOPED_TRACE(name);
    const std::string text = read_text(fixture_path(name));
    const FlexOffer fo = parse_message(text);
    const std::string again = serialize_message(fo);
    EXPECT_EQ(again, text);
    EXPECT_EQ(parse_message(again), fo);
  }
}

TEST(Codec, SfoFixtureContents) {
  const FlexOffer fo = load_fixture("sfo.json");
  EXPECT_EQ(fo.kind(), FoKind::sfo);
  EXPECT_EQ(fo.num_seconds_per_interval, 900);
  ASSERT_EQ(fo.slice_count(), 8u);
  for (const auto& sc : fo.profile) {
    EXPECT_EQ(sc.energy, (EnergyBounds{0.303, 0.478}));
    ASSERT_TRUE(sc.price);
    EXPECT_EQ(*sc.price, (PriceBounds{0.03, 0.15}));
  }
  ASSERT_TRUE(fo.default_schedule);
  ASSERT_EQ(fo.default_schedule->slices.size(), 8u);
  EXPECT_EQ(fo.default_schedule->slices[0], (ScheduleSlice{1, 0.423, 0.05}));
  ASSERT_TRUE(fo.location);
  EXPECT_DOUBLE_EQ(fo.location->longitude, 9.990595);
  EXPECT_EQ(fo.effective_start_after_interval(), 1726912);
}

TEST(Codec, DependencyAndUncertainEncodings) {
  const Json dfo = to_json(load_fixture("dfo.json"));
  EXPECT_EQ(dfo["flexOffer"]["flexOfferProfileConstraints"][0]["DependencyEnergyConstraintList"],
            Json::parse("[[0,1,0.392],[0,-1,-0.324]]"));
  const Json ufo = to_json(load_fixture("ufo.json"));
  EXPECT_EQ(ufo["flexOffer"]["flexOfferProfileConstraints"][1]["UncertainEnergyConstraintList"],
            Json::parse("[[1],[-20.6,66.67],[29.467,-66.67]]"));
}

TEST(Codec, SpacedConstraintKeysAreAccepted) {
  std::string text = read_text(fixture_path("dfo.json"));
  const auto pos = text.find("DependencyEnergyConstraintList");
  text.replace(pos, 30, "DependencyEnergy ConstraintList");
  EXPECT_EQ(parse_message(text), load_fixture("dfo.json"));
}

TEST(Codec, TecEntryRoundTrips) {
  const FlexOffer fo = load_fixture("tecfo.json");
  ASSERT_TRUE(fo.total_energy);
  EXPECT_EQ(*fo.total_energy, (EnergyBounds{2.592, 3.381}));
  const Json j = to_json(fo);
  EXPECT_EQ(j["flexOffer"]["flexOfferProfileConstraints"].back(),
            Json::parse(R"({"TotalEnergyConstraints":[{"lower":2.592,"upper":3.381}]})"));
}

TEST(Codec, MissingIdNamesTheAttribute) {
  Json j = Json::parse(read_text(fixture_path("sfo.json")));
  j["flexOffer"].erase("id");
  EXPECT_EQ(expect_error(j.dump()), "missing mandatory attribute ID");
}

TEST(Codec, DeletingAnyMandatoryKeyIsNamed) {
  const Json base = Json::parse(read_text(fixture_path("sfo.json")));
  for (const auto& attr : mandatory_attributes()) {
    SCOPED_TRACE(std::string(attr.name));
    Json j = base;
    switch (attr.scope) {
      case MandatoryAttribute::Scope::message: j["flexOffer"].erase(std::string(attr.wire_key)); break;
      case MandatoryAttribute::Scope::profile_entry:
        j["flexOffer"]["flexOfferProfileConstraints"][3].erase(std::string(attr.wire_key));
        break;
      case MandatoryAttribute::Scope::schedule_slice:
        j["flexOffer"]["defaultSchedule"]["scheduleSlices"][2].erase(std::string(attr.wire_key));
        break;
    }
    const std::string err = expect_error(j.dump());
    EXPECT_NE(err.find("missing mandatory attribute " + std::string(attr.name)), std::string::npos) << err;
  }
}

TEST(Codec, DeletingAnyOptionalKeyStillParses) {
  for (const char* name : {"sfo.json", "tecfo.json"}) {
    const Json base = Json::parse(read_text(fixture_path(name)));
    std::vector<Json::json_pointer> keys;
    collect_keys(base["flexOffer"], Json::json_pointer("/flexOffer"), keys);
    std::set<std::string> mandatory;
    for (const auto& a : mandatory_attributes()) mandatory.insert(std::string(a.wire_key));
    int tried = 0;
    for (const auto& p : keys) {
      const std::string key = p.back();
      if (mandatory.count(key)) continue;
      // sub-keys of a required pair, and the whole schedule slice list, are structural
      if (key == "lower" || key == "upper" || key == "minPrice" || key == "maxPrice" || key == "longitude" ||
          key == "latitude" || key == "userLocation" || key == "scheduleSlices" || key == "TotalEnergyConstraints") {
        continue;
      }
      Json j = base;
      j[p.parent_pointer()].erase(key);
      SCOPED_TRACE(p.to_string());
      EXPECT_NO_THROW(parse_message(j.dump()));
      ++tried;
    }
    EXPECT_GT(tried, 20);
  }
}

TEST(Codec, UnknownKeysArePreserved) {
  Json j = Json::parse(read_text(fixture_path("sfo.json")));
  j["flexOffer"]["vendorExtension"] = Json::parse(R"({"k": [1, 2, "x"]})");
  const FlexOffer fo = parse_message(j.dump());
  const Json back = to_json(fo);
  EXPECT_EQ(back["flexOffer"]["vendorExtension"], j["flexOffer"]["vendorExtension"]);
  EXPECT_EQ(back["flexOffer"]["assignment"], "obligatory");
  EXPECT_EQ(back["flexOffer"]["correct"], true);
}

TEST(Codec, MalformedInputs) {
  EXPECT_THROW(parse_message("{"), ParseError);
  EXPECT_THROW(parse_message("[]"), Error);
  Json j = Json::parse(read_text(fixture_path("sfo.json")));
  j["flexOffer"]["creationTime"] = "not a time";
  EXPECT_THROW(parse_message(j.dump()), ParseError);
  j = Json::parse(read_text(fixture_path("sfo.json")));
  j["flexOffer"]["state"] = "Adaptation";
  EXPECT_THROW(parse_message(j.dump()), ValidationError);
  j = Json::parse(read_text(fixture_path("sfo.json")));
  j["flexOffer"]["flexOfferProfileConstraints"][0]["energyConstraintList"][0]["lower"] = 0.9;
  EXPECT_THROW(parse_message(j.dump()), ValidationError);
}

TEST(Codec, ScheduleParsing) {
  const Json j = Json::parse(R"({"scheduleId": 3, "updateId": 1,
      "scheduleSlices": [{"duration": 1, "energyAmount": 0.423, "price": 0.05}],
      "startTime": "2019-04-02T00:00:00.000+0000"})");
  const Schedule s = parse_schedule(j, ScheduleKind::flexoffer_schedule);
  EXPECT_EQ(s.schedule_id, 3);
  EXPECT_EQ(s.update_id, 1);
  EXPECT_EQ(s.slices[0], (ScheduleSlice{1, 0.423, 0.05}));
  EXPECT_EQ(serialize_schedule(s), j);
  Json missing = j;
  missing["scheduleSlices"][0].erase("energyAmount");
  EXPECT_THROW(parse_schedule(missing, ScheduleKind::flexoffer_schedule), ValidationError);
}

TEST(Codec, FullPrecisionSchedules) {
  const Schedule s = make_schedule({1.0 / 3.0}, ScheduleKind::flexoffer_schedule);
  EXPECT_DOUBLE_EQ(serialize_schedule(s)["scheduleSlices"][0]["energyAmount"].get<double>(), 0.333333);
  EXPECT_EQ(serialize_schedule(s, true)["scheduleSlices"][0]["energyAmount"].get<double>(), 1.0 / 3.0);
}

TEST(Codec, RandomBoxFlexOffersRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    FlexOffer fo = testkit::random_box_fo(rng, "r" + std::to_string(i), 1 + i % 8, i % 2 == 0);
    fo.state_reason = "seed " + std::to_string(i);
    const std::string text = serialize_message(fo);
    const FlexOffer back = parse_message(text);
    EXPECT_EQ(serialize_message(back), text);
    EXPECT_EQ(back.profile, fo.profile);
    EXPECT_EQ(back.total_energy, fo.total_energy);
  }
}
