#include <gtest/gtest.h>

#include "flowhub/config.hpp"
#include "flowhub/doi.hpp"
#include "flowhub/error.hpp"

using namespace flowhub;

TEST(Config, ParsesSectionsAndLaunchers) {
  const Config c = parse_config(R"(# registry settings
doi_prefix = 10.12345
base_url = "https://hub.example.org"
max_file_mb = 5
embargo_hides_listing = true

[launcher]
galaxy = https://usegalaxy.example/import?trs={trs_id}&v={version} ; inline
galaxy.classes = galaxy, cwl
)");
  EXPECT_EQ(c.doi_prefix, "10.12345");
  EXPECT_EQ(c.base_url, "https://hub.example.org");
  EXPECT_EQ(c.max_file_bytes(), 5u * 1024 * 1024);
  EXPECT_TRUE(c.embargo_hides_listing);
  ASSERT_EQ(c.launchers.count("galaxy"), 1u);
  EXPECT_EQ(c.launchers.at("galaxy").classes, (std::set<ClassId>{"galaxy", "cwl"}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("colour = red\n"), Error);
  EXPECT_THROW(parse_config("max_file_mb = lots\n"), Error);
  EXPECT_THROW(parse_config("this line has no equals sign\n"), Error);
}

TEST(Launchers, TemplateEmbedsTrsIdAndVersion) {
  const Launcher l{"galaxy", "{base_url}/go?trs={trs_id}&version={version}&url={trs_url}", {"galaxy"}};
  const std::string url = expand_launcher(l, "https://hub.example.org", 12, 3);
  EXPECT_NE(url.find("trs=%23workflow%2F12"), std::string::npos) << url;
  EXPECT_NE(url.find("version=3"), std::string::npos) << url;
  EXPECT_EQ(url.rfind("https://hub.example.org/go?", 0), 0u) << url;
}

TEST(Launchers, FilteredByClass) {
  Config c;
  c.launchers["galaxy"] = {"galaxy", "x", {"galaxy"}};
  c.launchers["any"] = {"any", "y", {}};
  EXPECT_EQ(launchers_for(c, "galaxy").size(), 2u);
  ASSERT_EQ(launchers_for(c, "cwl").size(), 1u);
  EXPECT_EQ(launchers_for(c, "cwl")[0]->id, "any");
  EXPECT_TRUE(launchers_for(Config{}, "galaxy").empty());
}

TEST(Doi, FormatAndPayload) {
  EXPECT_EQ(format_doi("10.77777", 4, 2), "10.77777/wfhub.4.2");
  WorkflowEntry e;
  e.id = 4;
  e.title = "Assembly";
  e.license = "MIT";
  e.creators = {{"Ada Lovelace", "0000-0002-1825-0097", std::nullopt}};
  WorkflowVersion v;
  v.version = 2;
  DataciteContext ctx;
  ctx.doi = "10.77777/wfhub.4.2";
  ctx.url = "http://localhost:8080/workflows/4?version=2";
  ctx.class_name = "Galaxy";
  ctx.published = *timefmt::parse_iso8601("2024-03-01T00:00:00Z");
  ctx.derived_from = {"https://doi.org/10.77777/wfhub.1.1"};
  const auto payload = datacite_payload(e, v, ctx);
  const auto& attrs = payload["data"]["attributes"];
  EXPECT_EQ(attrs["doi"], ctx.doi);
  EXPECT_EQ(attrs["url"], ctx.url);
  EXPECT_EQ(attrs["titles"][0]["title"], "Assembly");
  EXPECT_EQ(attrs["publicationYear"], 2024);
  EXPECT_EQ(attrs["types"]["resourceTypeGeneral"], "Workflow");
  ASSERT_EQ(attrs["creators"].size(), 1u);
  EXPECT_EQ(attrs["creators"][0]["nameIdentifiers"][0]["nameIdentifier"], "https://orcid.org/0000-0002-1825-0097");
  EXPECT_EQ(attrs["relatedIdentifiers"][0]["relationType"], "IsDerivedFrom");
}

TEST(Doi, MockClientFailures) {
  MockMintClient m;
  m.fail_next(2);
  EXPECT_THROW(m.mint("a", {}), Error);
  EXPECT_THROW(m.mint("a", {}), Error);
  m.mint("a", {});
  EXPECT_EQ(m.calls().size(), 1u);
}
