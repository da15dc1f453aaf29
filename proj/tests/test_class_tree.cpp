#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <fstream>
#include <string>

#include "doctest.h"
#include "mls/class_tree.hpp"
#include "mls/errors.hpp"
#include "test_util.hpp"

using namespace mls;

namespace {

const char* kNestedXml = R"(<?xml version="1.0" encoding="UTF-8"?>
<!-- city classes -->
<classes>
  <class id="100" name="object">
    <class id="101" name="static"/>
    <class id="102" name="dynamic">
      <class id="103" name="car"/>
      <class id="104" name="pedestrian"/>
    </class>
  </class>
  <class id="200" name="surface"/>
</classes>
)";

LabeledPoint pt(std::uint32_t label, std::uint32_t class_id) {
  LabeledPoint p{};
  p.label = label;
  p.class_id = class_id;
  return p;
}

}  // namespace

TEST_CASE("nested class elements build the hierarchy") {
  const ClassTree tree = read_class_tree(kNestedXml);
  CHECK(tree.size() == 6);
  CHECK(tree.roots() == std::vector<std::uint32_t>{100, 200});
  CHECK(tree.ids() == std::vector<std::uint32_t>{100, 101, 102, 103, 104, 200});

  const ClassNode* dynamic = tree.find(102);
  REQUIRE(dynamic != nullptr);
  CHECK(dynamic->name == "dynamic");
  REQUIRE(dynamic->parent.has_value());
  CHECK(*dynamic->parent == 100);
  CHECK(dynamic->children == std::vector<std::uint32_t>{103, 104});

  CHECK(tree.name_of(104) == "pedestrian");
  CHECK(tree.name_of(9999) == "?");
  CHECK(tree.find(9999) == nullptr);
  CHECK_FALSE(tree.coarse_of(103).has_value());
}

TEST_CASE("explicit parent attributes win over nesting and definition order") {
  const char* xml = R"(<classes>
  <class id="3" name="leaf" parent="2"/>
  <class id="1" name="root">
    <class id="2" name="mid" parent="1"/>
  </class>
</classes>)";
  const ClassTree tree = read_class_tree(xml);
  CHECK(tree.roots() == std::vector<std::uint32_t>{1});
  REQUIRE(tree.find(3) != nullptr);
  CHECK(*tree.find(3)->parent == 2);
  CHECK(tree.find(2)->children == std::vector<std::uint32_t>{3});
}

TEST_CASE("coarse mapping parses and validates ids") {
  const std::string coarse = R"(<coarse>
  <class id="103" coarse="1"/>
  <class id="104" coarse="2"/>
</coarse>)";
  const ClassTree tree = read_class_tree(kNestedXml, &coarse);
  REQUIRE(tree.coarse_of(103).has_value());
  CHECK(*tree.coarse_of(103) == 1);
  CHECK(*tree.coarse_of(104) == 2);
  CHECK_FALSE(tree.coarse_of(101).has_value());
  CHECK(tree.coarse_map().size() == 2);

  const std::string bad = R"(<coarse><class id="777" coarse="1"/></coarse>)";
  CHECK_THROWS_AS(read_class_tree(kNestedXml, &bad), XmlError);
}

TEST_CASE("malformed trees are rejected") {
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"1\"/><class id=\"1\"/></classes>"),
                  XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"1\" parent=\"9\"/></classes>"),
                  XmlError);
  CHECK_THROWS_AS(
      read_class_tree("<classes><class id=\"1\" parent=\"2\"/><class id=\"2\" parent=\"1\"/>"
                      "</classes>"),
      XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"1\" parent=\"1\"/></classes>"),
                  XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class name=\"anon\"/></classes>"), XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"x\"/></classes>"), XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"1\">"), XmlError);
  CHECK_THROWS_AS(read_class_tree("<a/><b/>"), XmlError);
  CHECK_THROWS_AS(read_class_tree(""), XmlError);
  CHECK_THROWS_AS(read_class_tree("<classes><class id=\"99999999999\"/></classes>"), XmlError);
}

TEST_CASE("cloud_stats counts objects and points per class") {
  PointCloud cloud;
  cloud.points = {pt(0, 0),  pt(0, 0),  pt(1, 103), pt(1, 103), pt(2, 103),
                  pt(3, 104), pt(0, 200), pt(0, 200), pt(0, 200)};
  const StatsTable table = cloud_stats(cloud);
  CHECK(table.total_points == 9);
  CHECK(table.total_objects == 3);
  REQUIRE(table.rows.size() == 4);

  CHECK(table.rows[0].class_id == 0);
  CHECK(table.rows[0].name == "unassigned");
  CHECK(table.rows[0].object_count == 0);
  CHECK(table.rows[0].point_count == 2);

  CHECK(table.rows[1].class_id == 103);
  CHECK(table.rows[1].object_count == 2);
  CHECK(table.rows[1].point_count == 3);

  CHECK(table.rows[2].class_id == 104);
  CHECK(table.rows[2].object_count == 1);
  CHECK(table.rows[2].point_count == 1);

  CHECK(table.rows[3].class_id == 200);
  CHECK(table.rows[3].object_count == 0);
  CHECK(table.rows[3].point_count == 3);

  const ClassTree tree = read_class_tree(kNestedXml);
  const StatsTable named = cloud_stats(cloud, &tree);
  CHECK(named.rows[1].name == "car");
  CHECK(named.rows[2].name == "pedestrian");
  CHECK(named.rows[0].name == "?");
}

TEST_CASE("a label shared across classes counts once in the total") {
  PointCloud cloud;
  cloud.points = {pt(7, 103), pt(7, 104)};
  const StatsTable table = cloud_stats(cloud);
  CHECK(table.total_objects == 1);
  CHECK(table.rows[0].object_count == 1);
  CHECK(table.rows[1].object_count == 1);
}

TEST_CASE("format_stats renders a header, rows, and totals") {
  PointCloud cloud;
  cloud.points = {pt(1, 103), pt(0, 200)};
  const std::string text = format_stats(cloud_stats(cloud));
  CHECK(text.find("class_id") != std::string::npos);
  CHECK(text.find("objects") != std::string::npos);
  CHECK(text.find("total") != std::string::npos);
  std::size_t lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 4);  // header + 2 rows + totals
}

TEST_CASE("class tree file loading") {
  testutil::TempDir dir("urbanmls-classtree");
  {
    std::ofstream out(dir.file("tree.xml"));
    out << kNestedXml;
  }
  {
    std::ofstream out(dir.file("coarse.xml"));
    out << R"(<coarse><class id="200" coarse="0"/></coarse>)";
  }
  const ClassTree plain = read_class_tree_files(dir.file("tree.xml"));
  CHECK(plain.size() == 6);
  const std::string coarse_path = dir.file("coarse.xml");
  const ClassTree with_coarse = read_class_tree_files(dir.file("tree.xml"), &coarse_path);
  CHECK(with_coarse.coarse_of(200).has_value());
  CHECK_THROWS_AS(read_class_tree_files(dir.file("missing.xml")), Error);
}
