#include <gtest/gtest.h>

#include "ucmlab/app/config.hpp"

using ucmlab::app::Config;
using ucmlab::app::ConfigError;

TEST(Config, TypedReadsAndDefaults) {
  Config c = Config::from_string(
      "[grid]\nnx = 64 ; cells\nlx = 2.5\n[solver]\nsplitting = lie\nflag = yes\ntaus = 0.1, 0.2 0.3\n");
  EXPECT_EQ(c.get_int("grid", "nx", 1), 64);
  EXPECT_DOUBLE_EQ(c.get_double("grid", "lx", 1.0), 2.5);
  EXPECT_DOUBLE_EQ(c.get_double("grid", "ly", 7.0), 7.0);
  EXPECT_EQ(c.get_choice("solver", "splitting", "strang", {"strang", "lie"}), "lie");
  EXPECT_TRUE(c.get_bool("solver", "flag", false));
  EXPECT_EQ(c.get_list("solver", "taus", {}), (std::vector<double>{0.1, 0.2, 0.3}));
  EXPECT_NO_THROW(c.finish());
}

TEST(Config, UnknownKeysAreErrors) {
  Config c = Config::from_string("[grid]\nnx = 4\nnz = 3\n[bogus]\nk = 1\n");
  c.get_int("grid", "nx", 1);
  try {
    c.finish();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[grid] nz"), std::string::npos);
    EXPECT_NE(msg.find("[bogus] k"), std::string::npos);
  }
}

TEST(Config, TypeErrors) {
  Config c = Config::from_string("[a]\nx = abc\nn = 1.5\nb = maybe\nl = 1, q\ne = \nch = z\n");
  EXPECT_THROW(c.get_double("a", "x", 0), ConfigError);
  EXPECT_THROW(c.get_int("a", "n", 0), ConfigError);
  EXPECT_THROW(c.get_bool("a", "b", false), ConfigError);
  EXPECT_THROW(c.get_list("a", "l", {}), ConfigError);
  EXPECT_THROW(c.get_list("a", "e", {}), ConfigError);
  EXPECT_THROW(c.get_choice("a", "ch", "x", {"x", "y"}), ConfigError);
  EXPECT_THROW(c.require_string("a", "missing"), ConfigError);
}

TEST(Config, SyntaxErrors) {
  EXPECT_THROW(Config::from_string("[a\nx = 1\n"), ConfigError);
  EXPECT_THROW(Config::from_string("x = 1\n"), ConfigError);
  EXPECT_THROW(Config::from_string("[a]\nx = 1\nx = 2\n"), ConfigError);
  EXPECT_THROW(Config::from_file("/nonexistent/path.ini"), ConfigError);
}

TEST(Config, EffectiveRoundTrip) {
  Config c = Config::from_string("[params]\nlambda = 0.5\n[system]\ntype = svm2d\n");
  c.get_string("system", "type", "");
  c.get_double("params", "lambda", 1.0);
  c.get_double("params", "g", 9.81);
  c.set("output", "dir", "out");
  const std::string eff = c.effective();
  EXPECT_LT(eff.find("[system]"), eff.find("[params]"));
  EXPECT_NE(eff.find("g = 9.8100000000000005"), std::string::npos);

  Config d = Config::from_string(eff);
  EXPECT_EQ(d.get_string("system", "type", ""), "svm2d");
  EXPECT_DOUBLE_EQ(d.get_double("params", "lambda", 1.0), 0.5);
  EXPECT_DOUBLE_EQ(d.get_double("params", "g", 1.0), 9.81);
  EXPECT_EQ(d.get_string("output", "dir", ""), "out");
  EXPECT_NO_THROW(d.finish());
  EXPECT_EQ(d.effective(), eff);
}

TEST(Config, OverridesReplaceFileValues) {
  Config c = Config::from_string("[system]\nseed = 1\n");
  c.set("system", "seed", "42");
  EXPECT_EQ(c.get_int("system", "seed", 0), 42);
}
