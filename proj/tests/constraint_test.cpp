#include <gtest/gtest.h>

#include "schemamap/constraint.hpp"
#include "schemamap/stats.hpp"
#include "test_support.hpp"

using namespace schemamap;

namespace {

ValueExpr vleaf(CompareOp op, std::string text) { return ValueExpr::make_leaf({op, Literal(std::move(text))}); }

MetadataExpr mleaf(MetadataSubject s, CompareOp op, std::string text) {
  return MetadataExpr::make_leaf({s, op, Literal(std::move(text))});
}

template <typename E> E node(typename E::Kind kind, std::vector<E> children) {
  E e;
  e.kind = kind;
  e.children = std::move(children);
  return e;
}

bool v(std::string_view constraint, std::string_view cell, MatchOptions opts = {}) {
  return eval_value_constraint(parse_value_constraint(constraint), Cell(std::string(cell)), opts);
}

} // namespace

TEST(ConstraintParse, DemoStringsHaveDocumentedTrees) {
  const auto a = parse_value_constraint("California || Nevada");
  ASSERT_TRUE(a.expr);
  EXPECT_EQ(*a.expr, node<ValueExpr>(ValueExpr::Kind::Or, {vleaf(CompareOp::Eq, "California"),
                                                           vleaf(CompareOp::Eq, "Nevada")}));

  const auto b = parse_value_constraint("Lake Tahoe");
  ASSERT_TRUE(b.expr);
  EXPECT_EQ(*b.expr, vleaf(CompareOp::Eq, "Lake Tahoe"));

  const auto c = parse_metadata_constraint("DataType=='decimal' AND MinValue>='0'");
  ASSERT_TRUE(c.expr);
  EXPECT_EQ(*c.expr, node<MetadataExpr>(MetadataExpr::Kind::And,
                                        {mleaf(MetadataSubject::DataType, CompareOp::Eq, "decimal"),
                                         mleaf(MetadataSubject::MinValue, CompareOp::Ge, "0")}));
  EXPECT_TRUE(c.expr->children[1].leaf.constant.is_numeric());
}

TEST(ConstraintParse, EmptyAndWhitespaceAreEmpty) {
  EXPECT_TRUE(parse_value_constraint("").empty());
  EXPECT_TRUE(parse_value_constraint("   ").empty());
  EXPECT_TRUE(parse_metadata_constraint("").empty());
}

TEST(ConstraintParse, AndBindsTighterThanOr) {
  const auto c = parse_value_constraint("a || b && c");
  EXPECT_EQ(*c.expr, node<ValueExpr>(ValueExpr::Kind::Or,
                                     {vleaf(CompareOp::Eq, "a"),
                                      node<ValueExpr>(ValueExpr::Kind::And,
                                                      {vleaf(CompareOp::Eq, "b"), vleaf(CompareOp::Eq, "c")})}));
  const auto d = parse_value_constraint("(a || b) AND c");
  EXPECT_EQ(d.expr->kind, ValueExpr::Kind::And);
  EXPECT_EQ(d.expr->children[0].kind, ValueExpr::Kind::Or);
}

TEST(ConstraintParse, ChainsFlatten) {
  const auto c = parse_value_constraint("a || (b || c) OR d");
  ASSERT_EQ(c.expr->kind, ValueExpr::Kind::Or);
  EXPECT_EQ(c.expr->children.size(), 4u);
}

TEST(ConstraintParse, EqualsSynonymsAndOperators) {
  EXPECT_EQ(parse_value_constraint("= 5"), parse_value_constraint("== 5"));
  EXPECT_EQ(parse_value_constraint("5"), parse_value_constraint("=5"));
  const auto c = parse_value_constraint(">= 3 && < 10 && != 7");
  ASSERT_EQ(c.expr->children.size(), 3u);
  EXPECT_EQ(c.expr->children[0].leaf.op, CompareOp::Ge);
  EXPECT_EQ(c.expr->children[1].leaf.op, CompareOp::Lt);
  EXPECT_EQ(c.expr->children[2].leaf.op, CompareOp::Ne);
}

TEST(ConstraintParse, KeywordsAreUppercaseOnly) {
  const auto c = parse_value_constraint("rock and roll");
  EXPECT_EQ(*c.expr, vleaf(CompareOp::Eq, "rock and roll"));
  EXPECT_EQ(parse_value_constraint("a AND b").expr->kind, ValueExpr::Kind::And);
}

TEST(ConstraintParse, QuotedLiterals) {
  EXPECT_EQ(parse_value_constraint("'it\\'s'").expr->leaf.constant.text(), "it's");
  EXPECT_EQ(parse_value_constraint("\"a || b\"").expr->leaf.constant.text(), "a || b");
  // quoting does not change numeric typing
  EXPECT_TRUE(parse_value_constraint("'497'").expr->leaf.constant.is_numeric());
  EXPECT_FALSE(parse_value_constraint("'497 km'").expr->leaf.constant.is_numeric());
}

TEST(ConstraintParse, ErrorsCarryPositions) {
  try {
    parse_value_constraint(">= abc");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.position(), 3u);
  }
  try {
    parse_value_constraint("(a || b");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.position(), 0u);
  }
  EXPECT_THROW(parse_value_constraint("a ||"), ParseError);
  EXPECT_THROW(parse_value_constraint("a )"), ParseError);
  EXPECT_THROW(parse_value_constraint("'open"), ParseError);
  EXPECT_THROW(parse_value_constraint("()"), ParseError);
  EXPECT_THROW(parse_value_constraint("a & b"), ParseError);
  EXPECT_THROW(parse_metadata_constraint("Colour == 'red'"), ParseError);
  EXPECT_THROW(parse_metadata_constraint("DataType > 'int'"), ParseError);
  EXPECT_THROW(parse_metadata_constraint("DataType == 'blob'"), ParseError);
  EXPECT_THROW(parse_metadata_constraint("MinValue >= 'ten'"), ParseError);
  EXPECT_THROW(parse_metadata_constraint("MaxLength"), ParseError);
}

TEST(ConstraintParse, RoundTripProperty) {
  testkit::ConstraintGenerator gen(20240601);
  for (int i = 0; i < 200; ++i) {
    const auto text = gen.value_constraint();
    const auto first = parse_value_constraint(text);
    const auto printed = to_string(first);
    const auto second = parse_value_constraint(printed);
    EXPECT_EQ(first, second) << text << "  =>  " << printed;
    EXPECT_EQ(printed, to_string(second));
  }
  for (int i = 0; i < 200; ++i) {
    const auto text = gen.metadata_constraint();
    const auto first = parse_metadata_constraint(text);
    const auto second = parse_metadata_constraint(to_string(first));
    EXPECT_EQ(first, second) << text;
  }
}

TEST(ConstraintEval, TextEqualityIsCaseInsensitiveAndTrimmed) {
  EXPECT_TRUE(v("California || Nevada", "California"));
  EXPECT_TRUE(v("california", "  CALIFORNIA "));
  EXPECT_FALSE(v("California || Nevada", "Oregon"));
  EXPECT_FALSE(v("california", "California", {MatchMode::Cell, true}));
  EXPECT_TRUE(v("Lake Tahoe", "Lake Tahoe"));
  EXPECT_FALSE(v("Tahoe", "Lake Tahoe"));
}

TEST(ConstraintEval, TokenModeMatchesContiguousTokens) {
  const MatchOptions token{MatchMode::Token, false};
  EXPECT_TRUE(v("Tahoe", "Lake Tahoe", token));
  EXPECT_TRUE(v("lake tahoe", "Lake Tahoe, CA", token));
  EXPECT_FALSE(v("Tahoe Lake", "Lake Tahoe", token));
  EXPECT_FALSE(v("Taho", "Lake Tahoe", token));
}

TEST(ConstraintEval, NumericComparisons) {
  EXPECT_TRUE(v("497", "497.0"));
  EXPECT_TRUE(v("> 100", "497"));
  EXPECT_TRUE(v(">= 0 && <= 1000", "53.2"));
  EXPECT_FALSE(v("> 100", "53.2"));
  EXPECT_FALSE(v("> 0", "Lake Tahoe")); // ordering is false on text cells
  EXPECT_FALSE(v("> 0", ""));
  EXPECT_TRUE(v("!= 5", "6"));
  EXPECT_FALSE(v("!= 5", "5.0"));
  EXPECT_TRUE(v("", "anything"));
}

TEST(ConstraintEval, ConnectivesAreMonotone) {
  testkit::ConstraintGenerator gen(7);
  const std::vector<std::string> cells = {"", "0", "12", "497", "53.2", "Lake Tahoe", "california", "x", "-3", "1000"};
  for (int i = 0; i < 100; ++i) {
    const auto a = parse_value_constraint(gen.value_constraint());
    const auto b = parse_value_constraint(gen.value_constraint());
    ValueExpr both = node<ValueExpr>(ValueExpr::Kind::And, {*a.expr, *b.expr});
    ValueExpr either = node<ValueExpr>(ValueExpr::Kind::Or, {*a.expr, *b.expr});
    for (const auto &text : cells) {
      const Cell cell(text);
      const bool ea = eval(*a.expr, cell);
      EXPECT_LE(eval(both, cell), ea);
      EXPECT_GE(eval(either, cell), ea);
    }
  }
}

TEST(ConstraintEval, Metadata) {
  const std::vector<Cell> decimals = {Cell("497"), Cell("53.2"), Cell("981")};
  const std::vector<Cell> ints = {Cell("3"), Cell("7")};
  const std::vector<Cell> texts = {Cell("Lake Tahoe")};
  const auto d = compute_column_stats(decimals, "area");
  const auto i = compute_column_stats(ints, "population");
  const auto t = compute_column_stats(texts, "name");
  auto m = [](std::string_view s, const ColumnStats &st) {
    return eval_metadata_constraint(parse_metadata_constraint(s), st);
  };
  EXPECT_TRUE(m("DataType=='decimal' AND MinValue>='0'", d));
  EXPECT_TRUE(m("DataType=='decimal'", i)); // decimal subsumes int
  EXPECT_FALSE(m("DataType=='int'", d));
  EXPECT_FALSE(m("DataType=='decimal'", t));
  EXPECT_TRUE(m("DataType != 'int'", t));
  EXPECT_FALSE(m("MinValue >= 0", t));
  EXPECT_TRUE(m("MaxValue <= 981 && MinValue > 53", d));
  EXPECT_TRUE(m("MaxLength <= 10", t));
  EXPECT_FALSE(m("MaxLength < 10", t));
  EXPECT_TRUE(m("ColumnName = 'NAME'", t));
  EXPECT_FALSE(m("ColumnName != name", t));
}

TEST(SynthesisTask, ValidatesShape) {
  EXPECT_THROW(SynthesisTask::parse(0, {}, {}), TaskError);
  EXPECT_THROW(SynthesisTask::parse(2, {{"a"}}, {}), TaskError);
  EXPECT_THROW(SynthesisTask::parse(2, {{"", ""}}, {"", ""}), TaskError);
  EXPECT_THROW(SynthesisTask::parse(2, {{"a", ""}}, {""}), TaskError);
  const auto t = SynthesisTask::parse(2, {}, {"DataType=='int'", ""});
  EXPECT_FALSE(t.column_unconstrained(0));
  EXPECT_TRUE(t.column_unconstrained(1));
  EXPECT_EQ(SynthesisTask::parse(2, {{"a", ""}}, {}).metadata().size(), 2u);
}

TEST(SynthesisTask, ParseErrorsNameTheCell) {
  try {
    SynthesisTask::parse(2, {{"a", "b"}, {"c", ">= abc"}}, {});
    FAIL();
  } catch (const TaskParseError &e) {
    EXPECT_FALSE(e.in_metadata());
    EXPECT_EQ(e.row(), 1u);
    EXPECT_EQ(e.column(), 1u);
    EXPECT_EQ(e.position(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 1 column 1"), std::string::npos);
  }
  try {
    SynthesisTask::parse(2, {{"a", "b"}}, {"", "Colour = 'red'"});
    FAIL();
  } catch (const TaskParseError &e) {
    EXPECT_TRUE(e.in_metadata());
    EXPECT_EQ(e.column(), 1u);
  }
}

TEST(Numbers, ParseAndCanonicalForm) {
  EXPECT_EQ(parse_decimal("53.2"), 53.2);
  EXPECT_EQ(parse_decimal(" -0.5 "), -0.5);
  EXPECT_EQ(parse_decimal("+7"), 7.0);
  EXPECT_EQ(parse_decimal("1e3"), 1000.0);
  EXPECT_FALSE(parse_decimal("inf"));
  EXPECT_FALSE(parse_decimal("nan"));
  EXPECT_FALSE(parse_decimal("0x10"));
  EXPECT_FALSE(parse_decimal("12abc"));
  EXPECT_FALSE(parse_decimal("."));
  EXPECT_EQ(canonical_number(497.0), "497");
  EXPECT_EQ(canonical_number(53.2), "53.2");
  EXPECT_EQ(canonical_number(-0.0), "0");
}
