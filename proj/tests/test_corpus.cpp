// Copyright 2026 The Polevent Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <set>
#include <sstream>

#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "polevent/corpus.hpp"
#include "polevent/error.hpp"

using namespace polevent;
using namespace polevent::corpus;
using namespace std::chrono;

namespace {

ParseResult parse(const std::string& s) {
  std::istringstream in(s);
  return parse_jsonl(in);
}

std::vector<Document> documents(const std::string& jsonl, const CorpusFilter& f = {}) {
  return normalize_filter(parse(jsonl).records, f).documents;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("parse_jsonl reads a dataset record") {
  auto r = parse(
      R"({"category":"POLITICS","headline":"FDA Greenlights First COVID-19 Breathalyzer Test",)"
      R"("authors":"Sarah Ruiz-Grossman","link":"https://example.org/a","short_description":"",)"
      R"("date":"2022-04-14"})");
  REQUIRE(r.records.size() == 1);
  CHECK(r.rejects.empty());
  const auto& rec = r.records[0];
  CHECK(rec.headline == "FDA Greenlights First COVID-19 Breathalyzer Test");
  CHECK(rec.authors == "Sarah Ruiz-Grossman");
  CHECK(rec.date == "2022-04-14");
  CHECK(rec.line == 1);
}

TEST_CASE("parse_jsonl on empty input is EmptyCorpus") {
  CHECK(kind_of([] { parse(""); }) == ErrorKind::kEmptyCorpus);
  CHECK(kind_of([] { parse("\n   \n"); }) == ErrorKind::kEmptyCorpus);
  CHECK(kind_of([] { parse("not json\n"); }) == ErrorKind::kEmptyCorpus);
}

TEST_CASE("malformed lines become rejects with their line numbers") {
  std::string s = fixtures::corpus_line("One", "2021-01-01") + fixtures::corpus_line("Two", "2021-01-02") +
                  "just some plain text\n" + fixtures::corpus_line("Three", "2021-01-03");
  auto r = parse(s);
  CHECK(r.records.size() == 3);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].line == 3);
  CHECK(r.records[2].line == 4);
}

TEST_CASE("non-object lines and mistyped fields are rejected") {
  auto r = parse("[1,2]\n" R"({"headline":5,"date":"2021-01-01"})" "\n" +
                 fixtures::corpus_line("Ok", "2021-01-01") + R"({"headline":"x"})" "\n");
  CHECK(r.records.size() == 1);
  CHECK(r.rejects.size() == 3);
}

TEST_CASE("CRLF line endings are tolerated") {
  auto r = parse(R"({"headline":"A","date":"2021-01-01","category":"POLITICS"})" "\r\n");
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].headline == "A");
}

TEST_CASE("normalize_filter applies the date window and categories") {
  auto docs = documents(fixtures::corpus_line("Queen Elizabeth Contracts COVID-19", "2022-02-20", "Unnamed") +
                        fixtures::corpus_line("Old news", "2019-06-01") +
                        fixtures::corpus_line("Sports", "2021-01-01", "", "", "SPORTS") +
                        fixtures::corpus_line("Lower case category", "2021-01-01", "", "", "politics") +
                        fixtures::corpus_line("Edge start", "2020-01-01") +
                        fixtures::corpus_line("Edge end", "2022-12-31") +
                        fixtures::corpus_line("Past end", "2023-01-01"));
  std::set<std::string> heads;
  for (const auto& d : docs) heads.insert(d.headline);
  CHECK(heads == std::set<std::string>{"Queen Elizabeth Contracts COVID-19", "Lower case category",
                                       "Edge start", "Edge end"});
  CHECK(docs[0].published == year_month_day{year{2022} / February / 20});
  CHECK_FALSE(docs[0].author.has_value());
}

TEST_CASE("authors: Unnamed and empty map to none") {
  auto docs = documents(fixtures::corpus_line("A", "2021-01-01", "Unnamed") +
                        fixtures::corpus_line("B", "2021-01-01", "  ") +
                        fixtures::corpus_line("C", "2021-01-01", "Nick Visser"));
  REQUIRE(docs.size() == 3);
  CHECK_FALSE(docs[0].author);
  CHECK_FALSE(docs[1].author);
  CHECK(docs[2].author == "Nick Visser");
}

TEST_CASE("unparseable dates are rejected, not fatal") {
  auto p = parse(fixtures::corpus_line("A", "2021-02-30") + fixtures::corpus_line("B", "yesterday") +
                 fixtures::corpus_line("C", "2021-03-01"));
  auto n = normalize_filter(p.records, {});
  CHECK(n.documents.size() == 1);
  REQUIRE(n.rejects.size() == 2);
  CHECK(n.rejects[0].line == 1);
  CHECK(n.rejects[1].line == 2);
}

TEST_CASE("datetime suffixes canonicalize to ISO dates") {
  auto docs = documents(fixtures::corpus_line("A", "2021-05-09T13:45:00Z"));
  REQUIRE(docs.size() == 1);
  CHECK(to_raw(docs[0]).date == "2021-05-09");
}

TEST_CASE("inverted filter window is a config error") {
  CorpusFilter f;
  f.date_from = year{2022} / 1 / 1;
  f.date_to = year{2021} / 1 / 1;
  CHECK(kind_of([&] { f.validate(); }) == ErrorKind::kConfig);
}

TEST_CASE("doc ids are content derived and unique") {
  std::string line = fixtures::corpus_line("Same", "2021-01-01");
  auto a = documents(line + line + fixtures::corpus_line("Other", "2021-01-01"));
  REQUIRE(a.size() == 3);
  CHECK(a[1].doc_id == a[0].doc_id + "-2");
  CHECK(a[2].doc_id != a[0].doc_id);
  // Stable across runs and independent of position.
  auto b = documents(fixtures::corpus_line("Other", "2021-01-01") + line);
  CHECK(b[0].doc_id == a[2].doc_id);
  CHECK(b[1].doc_id == a[0].doc_id);
}

TEST_CASE("filtering is idempotent") {
  std::mt19937_64 rng(11);
  std::string s;
  const char* dates[] = {"2019-12-31", "2020-01-01", "2021-06-15", "2022-12-31", "2023-01-01", "bad"};
  const char* cats[] = {"POLITICS", "politics", "WELLNESS", ""};
  for (int i = 0; i < 200; ++i)
    s += fixtures::corpus_line("Headline " + std::to_string(rng() % 50), dates[rng() % 6],
                               rng() % 2 ? "Unnamed" : "Someone", "", cats[rng() % 4]);
  auto first = normalize_filter(parse(s).records, {}).documents;
  std::vector<RawRecord> raws;
  for (const auto& d : first) raws.push_back(to_raw(d));
  auto second = normalize_filter(raws, {}).documents;
  CHECK(first == second);
}

TEST_CASE("parse, serialize, parse is stable") {
  auto first = documents(fixtures::read_text(fixtures::sample_corpus()));
  std::ostringstream out;
  write_jsonl(out, first);
  auto second = documents(out.str());
  CHECK(first == second);
}

TEST_CASE("sample fixture: 15 documents, 15 chunks") {
  auto docs = documents(fixtures::read_text(fixtures::sample_corpus()));
  CHECK(docs.size() == 15);
  auto chunks = chunk_documents(docs, {});
  CHECK(chunks.size() == 15);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(chunks[i].chunk_id == docs[i].doc_id + "#0");
    CHECK(chunks[i].text == docs[i].headline);
  }
}

TEST_CASE("short headline with empty body is one chunk") {
  Document d;
  d.doc_id = "d1";
  d.headline = std::string(60, 'h');
  auto chunks = chunk_documents({d}, {512});
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == d.headline);
  CHECK(chunks[0].chunk_id == "d1#0");
  CHECK(chunks[0].doc_ref == "d1");
}

TEST_CASE("headline and body join with an em dash") {
  Document d;
  d.doc_id = "d1";
  d.headline = "Head";
  d.body = "Body text";
  auto chunks = chunk_documents({d}, {});
  REQUIRE(chunks.size() == 1);
  CHECK(chunks[0].text == "Head \xE2\x80\x94 Body text");
}

TEST_CASE("long text splits at whitespace under the budget") {
  // 1200 bytes: headline "H" + separator + words of 9 letters plus a space.
  Document d;
  d.doc_id = "d9";
  d.headline = "Headline";
  std::string body;
  while (d.headline.size() + 5 + body.size() < 1200) body += "abcdefghi ";
  body.resize(1200 - d.headline.size() - 5);
  d.body = body;
  std::string full = d.headline + " \xE2\x80\x94 " + d.body;
  REQUIRE(full.size() == 1200);

  auto chunks = chunk_documents({d}, {512});
  REQUIRE(chunks.size() == 3);
  std::string joined;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    CHECK(chunks[i].text.size() <= 512);
    CHECK(chunks[i].chunk_id == "d9#" + std::to_string(i));
    if (i) joined += ' ';
    joined += chunks[i].text;
  }
  auto squash = [](const std::string& s) {
    std::string out;
    for (char c : s)
      if (c != ' ') out += c;
    return out;
  };
  CHECK(squash(joined) == squash(full));
}

TEST_CASE("text without whitespace is cut on code point boundaries") {
  Document d;
  d.doc_id = "u";
  d.headline = "";
  for (int i = 0; i < 100; ++i) d.headline += "\xC3\xA9";  // 200 bytes of e-acute
  auto chunks = chunk_documents({d}, {65});
  std::string joined;
  for (const auto& c : chunks) {
    CHECK(c.text.size() <= 65);
    CHECK((static_cast<unsigned char>(c.text[0]) & 0xC0) != 0x80);
    joined += c.text;
  }
  CHECK(joined == d.headline);
}

TEST_CASE("every chunk resolves to exactly one document") {
  std::string s;
  for (int i = 0; i < 40; ++i)
    s += fixtures::corpus_line("Headline " + std::to_string(i % 7), "2021-01-01", "",
                               std::string(static_cast<std::size_t>(i) * 37, 'x') + " tail");
  auto docs = documents(s);
  auto chunks = chunk_documents(docs, {128});
  std::map<std::string, int> ids;
  for (const auto& d : docs) ids[d.doc_id]++;
  std::set<std::string> with_chunks;
  for (const auto& c : chunks) {
    REQUIRE(ids.count(c.doc_ref) == 1);
    CHECK(ids[c.doc_ref] == 1);
    with_chunks.insert(c.doc_ref);
  }
  CHECK(with_chunks.size() == docs.size());
}

TEST_CASE("max_chars below 64 is rejected") {
  CHECK(kind_of([] { chunk_documents({}, {63}); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("custom field names") {
  FieldMap f;
  f.headline = "title";
  f.date = "published";
  std::istringstream in(R"({"title":"Renamed","published":"2021-01-01","category":"POLITICS"})");
  auto r = parse_jsonl(in, f);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].headline == "Renamed");
}

TEST_CASE("rejects report is one JSON object per line") {
  std::ostringstream out;
  write_rejects(out, {{3, "malformed JSON"}, {7, "missing date"}});
  CHECK(out.str() ==
        "{\"line\":3,\"reason\":\"malformed JSON\"}\n{\"line\":7,\"reason\":\"missing date\"}\n");
}
