#include "smfm/encoding.hpp"
#include "smfm/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace smfm;
using namespace smfm::testing;

namespace {

EncodingSchema sample_schema(bool oov = false) {
  return EncodingSchema({{"user", ColumnKind::one_hot, {"u1", "u2", "u3"}},
                         {"tags", ColumnKind::multi_hot, {"a", "b", "c", "d"}},
                         {"age", ColumnKind::numeric, {}, 10.0, 50.0}},
                        oov);
}

}  // namespace

TEST_CASE("ranges are disjoint and cover [0, m)") {
  for (bool oov : {false, true}) {
    const auto s = sample_schema(oov);
    const auto u = s.range("user"), t = s.range("tags"), a = s.range("age");
    CHECK(u.begin == 0);
    CHECK(u.end == t.begin);
    CHECK(t.end == a.begin);
    CHECK(a.end == s.dim());
    CHECK(a.size() == 1);
    CHECK(u.size() == (oov ? 4u : 3u));
    CHECK(s.dim() == (oov ? 10u : 8u));
  }
  CHECK_THROWS_AS(sample_schema().range("nope"), ValidationError);
}

TEST_CASE("one-hot, multi-hot and numeric encoding") {
  const auto s = sample_schema();
  std::istringstream in("user,tags,age,label\nu2,c|a|c,30,1\nu1,,70,0\nu3,d,0,1\n");
  const auto table = RecordTable::read(in);
  const Dataset d = encode_records(table, s);
  REQUIRE(d.size() == 3);
  CHECK(d.dim() == 8);

  const auto& x0 = d[0].x;
  CHECK(x0.nnz() == 4);
  CHECK(x0.at(1) == 1.0);  // u2
  CHECK(x0.at(3) == 1.0);  // a
  CHECK(x0.at(5) == 1.0);  // c
  CHECK(x0.at(7) == doctest::Approx(0.5));
  CHECK(d[0].y == 1.0);

  CHECK(d[1].x.nnz() == 2);
  CHECK(d[1].x.at(7) == 1.0);  // clamped from above
  CHECK(d[1].y == 0.0);

  CHECK(d[2].x.nnz() == 2);    // age 0 clamps to zero and is dropped
  CHECK_FALSE(d[2].x.contains(7));
  for (const auto& ex : d) CHECK(ex.x.at(0) + ex.x.at(1) + ex.x.at(2) == 1.0);
}

TEST_CASE("records without a label column are positives") {
  std::istringstream in("user,tags,age\nu1,a,20\n");
  const auto table = RecordTable::read(in);
  CHECK(table.labels == std::vector<double>{1.0});
  std::istringstream bad("user,label\nu1,2\n");
  CHECK_THROWS_AS(RecordTable::read(bad), ParseError);
  std::istringstream ragged("user,label\nu1\n");
  CHECK_THROWS_AS(RecordTable::read(ragged), ParseError);
}

TEST_CASE("unseen categories throw unless OOV is reserved") {
  std::istringstream in("user,tags,age\nu9,a|zz,20\n");
  const auto table = RecordTable::read(in);
  CHECK_THROWS_AS(encode_records(table, sample_schema(false)), ValidationError);

  const auto s = sample_schema(true);
  const Dataset d = encode_records(table, s);
  CHECK(d[0].x.contains(s.oov_index(0)));
  CHECK(d[0].x.contains(s.oov_index(1)));
  CHECK(s.oov_index(0) == s.range("user").end - 1);
  CHECK_THROWS_AS(sample_schema(false).oov_index(0), ValidationError);
}

TEST_CASE("fit appends unseen values in order of appearance") {
  EncodingSchema s({{"item", ColumnKind::one_hot, {"x"}}});
  s.fit({"item"}, {{"z"}, {"x"}, {"y"}, {"z"}});
  CHECK(s.columns()[0].vocabulary == std::vector<std::string>{"x", "z", "y"});
  CHECK(s.dim() == 3);
  CHECK(s.lookup(0, "y") == FeatureIndex{2});
  CHECK_FALSE(s.lookup(0, "w").has_value());
}

TEST_CASE("schema text with vocabulary files") {
  TempDir dir;
  write_file(dir / "users.txt", "alice\nbob\n\n");
  write_file(dir / "schema.txt", "# comment\nuser onehot users.txt\ngenre multihot\nprice numeric 0,100\n");
  const auto s = EncodingSchema::load(dir / "schema.txt");
  REQUIRE(s.columns().size() == 3);
  CHECK(s.columns()[0].vocabulary.size() == 2);
  CHECK(s.columns()[1].kind == ColumnKind::multi_hot);
  CHECK(s.columns()[2].max == 100.0);
  CHECK(s.dim() == 3);

  std::istringstream bad("user badkind\n");
  CHECK_THROWS_AS(EncodingSchema::parse(bad), ParseError);
  std::istringstream num("price numeric 5\n");
  CHECK_THROWS_AS(EncodingSchema::parse(num), ParseError);
  std::istringstream missing("user onehot nofile.txt\n");
  CHECK_THROWS_AS(EncodingSchema::parse(missing, dir.path().string()), IoError);
  CHECK_THROWS_AS(EncodingSchema({{"a", ColumnKind::numeric, {}, 1.0, 1.0}}), ValidationError);
  CHECK_THROWS_AS(EncodingSchema({{"a", ColumnKind::one_hot, {"x", "x"}}}), ValidationError);
}
