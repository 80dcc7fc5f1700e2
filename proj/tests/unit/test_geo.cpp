#include <doctest.h>

#include <sstream>

#include "skyoctopus/csv.hpp"
#include "skyoctopus/geo.hpp"
#include "support.hpp"

using namespace skyoct;

TEST_CASE("great circle distance agrees with the spherical law of cosines") {
  auto cosine_law = [](double la1, double lo1, double la2, double lo2) {
    const double a = deg_to_rad(la1), b = deg_to_rad(la2), d = deg_to_rad(lo2 - lo1);
    return kEarthRadiusKm * std::acos(std::sin(a) * std::sin(b) + std::cos(a) * std::cos(b) * std::cos(d));
  };
  const double pairs[][4] = {{51.5074, -0.1278, 48.8566, 2.3522},
                             {39.0438, -77.4874, 48.8566, 2.3522},
                             {-33.87, 151.21, 35.68, 139.65},
                             {0.0, 0.0, 0.0, 90.0}};
  for (const auto& p : pairs) {
    CHECK(great_circle_distance_km(p[0], p[1], p[2], p[3]) == doctest::Approx(cosine_law(p[0], p[1], p[2], p[3])).epsilon(1e-9));
  }
  CHECK(great_circle_distance_km(10.0, 20.0, 10.0, 20.0) == 0.0);
  CHECK(great_circle_distance_km(0.0, 0.0, 0.0, 90.0) == doctest::Approx(kPi / 2.0 * kEarthRadiusKm));
}

TEST_CASE("surface positions lie on the sphere") {
  for (double lat = -90.0; lat <= 90.0; lat += 15.0) {
    for (double lon = -180.0; lon < 180.0; lon += 30.0) {
      CHECK(surface_position(lat, lon).norm() == doctest::Approx(kEarthRadiusKm).epsilon(1e-12));
    }
  }
  const auto p = surface_position(0.0, 90.0);
  CHECK(p.x == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(p.y == doctest::Approx(kEarthRadiusKm));
}

TEST_CASE("longitudes wrap into [-180, 180)") {
  CHECK(normalize_longitude(180.0) == -180.0);
  CHECK(normalize_longitude(190.0) == doctest::Approx(-170.0));
  CHECK(normalize_longitude(-190.0) == doctest::Approx(170.0));
  CHECK(normalize_longitude(45.0) == 45.0);
}

TEST_CASE("ground sites reject out-of-range coordinates") {
  CHECK(testing::error_kind([] { GroundSite{"x", 91.0, 0.0}.validate(); }) == ErrorKind::kInput);
  CHECK(testing::error_kind([] { GroundSite{"x", 0.0, 180.0}.validate(); }) == ErrorKind::kInput);
  CHECK_FALSE(testing::error_kind([] { GroundSite{"x", -90.0, -180.0}.validate(); }));
}

TEST_CASE("csv reader skips comments and trims fields") {
  std::istringstream in("# header comment\n\n a , 1.5 ,b\nc,2,d  \n");
  const auto recs = read_csv(in);
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].fields == std::vector<std::string>{"a", "1.5", "b"});
  CHECK(recs[0].line == 3);
  CHECK(recs[1].fields[2] == "d");
  CHECK(parse_double(" 2.25 ") == 2.25);
  CHECK(parse_int("42") == 42);
  CHECK(testing::error_kind([] { parse_double("abc"); }));
  CHECK(testing::error_kind([] { parse_int("4x"); }));
}

TEST_CASE("values render with six decimals and no negative zero") {
  CHECK(format_value(1.0) == "1.000000");
  CHECK(format_value(-0.0) == "0.000000");
  CHECK(format_value(2.0 / 3.0) == "0.666667");
}
