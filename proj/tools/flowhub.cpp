#include <cstdlib>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "flowhub/api.hpp"
#include "flowhub/http.hpp"
#include "flowhub/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flowhub;

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kAccess = 3, kNotFound = 4, kTransport = 5 };

int exit_code_for(int status) {
  if (status < 300 || status == 302) return kOk;
  if (status == 401 || status == 403) return kAccess;
  if (status == 404) return kNotFound;
  if (status == 400 || status == 409 || status == 413 || status == 422) return kValidation;
  return kFailure;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw Error(ErrorCode::io_error, "cannot write " + p.string());
}

json upload_files(const fs::path& dir) {
  json files = json::object();
  if (fs::is_regular_file(dir)) {
    files[dir.filename().string()] = {{"content_base64", base64::encode(read_file(dir))}};
    return files;
  }
  if (!fs::is_directory(dir)) throw Error(ErrorCode::not_found, "no such file or directory: " + dir.string());
  for (auto it = fs::recursive_directory_iterator(dir); it != fs::recursive_directory_iterator(); ++it) {
    if (it->is_directory() && it->path().filename() == ".git") {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_regular_file()) continue;
    files[fs::relative(it->path(), dir).generic_string()] = {{"content_base64", base64::encode(read_file(it->path()))}};
  }
  return files;
}

struct Globals {
  std::string store_dir;
  std::string config_file;
  std::string server;
  std::string token;
  std::string as_user;
  bool json_out = false;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual ApiResponse send(const ApiRequest& req) = 0;
};

class LocalTransport : public Transport {
 public:
  LocalTransport(const Config& config, const std::string& as_user) {
    RegistryOptions options;
    options.config = config;
    registry_ = std::make_unique<Registry>(std::move(options));
    api_ = std::make_unique<ApiService>(*registry_);
    actor_ = as_user.empty() ? Actor::local_operator() : Actor::of(as_user);
  }
  ApiResponse send(const ApiRequest& req) override { return api_->handle(req, &actor_); }
  ApiService& api() { return *api_; }

 private:
  std::unique_ptr<Registry> registry_;
  std::unique_ptr<ApiService> api_;
  Actor actor_;
};

class RemoteTransport : public Transport {
 public:
  RemoteTransport(const std::string& url, const std::string& token) : client_(url, token) {}
  ApiResponse send(const ApiRequest& req) override { return client_.send(req); }

 private:
  HttpClient client_;
};

Config load_settings(const Globals& g) {
  std::string path = g.config_file;
  if (path.empty()) {
    if (const char* env = std::getenv("FLOWHUB_CONFIG")) path = env;
  }
  Config config = path.empty() ? Config{} : load_config(path);
  if (!g.store_dir.empty()) config.store_dir = g.store_dir;
  return config;
}

std::unique_ptr<Transport> make_transport(const Globals& g) {
  std::string token = g.token;
  if (token.empty()) {
    if (const char* env = std::getenv("FLOWHUB_TOKEN")) token = env;
  }
  if (!g.server.empty()) return std::make_unique<RemoteTransport>(g.server, token);
  return std::make_unique<LocalTransport>(load_settings(g), g.as_user);
}

ApiRequest json_request(std::string method, const std::string& target, const json& body) {
  ApiRequest r = ApiRequest::make(std::move(method), target, body.dump());
  r.headers["content-type"] = "application/json";
  return r;
}

std::string enc(const std::string& s) { return text::url_encode(s); }

// Prints errors to stderr; returns the exit code.
int report_error(const ApiResponse& res) {
  std::string message = res.body;
  try {
    json j = json::parse(res.body);
    message = j.value("code", json("error")).dump() + ": " + j.value("message", "");
    if (j.contains("report")) {
      for (const auto& e : j["report"].value("errors", json::array()))
        message += "\n  " + e.value("code", "") + ": " + e.value("message", "");
    }
  } catch (const json::exception&) {
  }
  std::cerr << "error (" << res.status << "): " << message << "\n";
  return exit_code_for(res.status);
}

int finish(const Globals& g, const ApiResponse& res, const std::function<void(const json&)>& human) {
  if (res.status >= 300 && res.status != 302) {
    if (g.json_out) std::cout << res.body << "\n";
    return report_error(res);
  }
  if (g.json_out) {
    std::cout << (res.body.empty() ? "{}" : res.body) << "\n";
  } else if (human) {
    human(res.body.empty() ? json::object() : json::parse(res.body));
  }
  return kOk;
}

void print_warnings(const json& j) {
  for (const auto& w : j.value("warnings", json::array()))
    std::cout << "  warning " << w.value("code", "") << ": " << w.value("message", "") << "\n";
  for (const auto& n : j.value("notes", json::array())) std::cout << "  note: " << n.get<std::string>() << "\n";
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowhub: computational workflow registry"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store_dir, "Store directory for local operation");
  app.add_option("--config", g.config_file, "Configuration file (default: $FLOWHUB_CONFIG)");
  app.add_option("--server", g.server, "Talk to a running server instead of a local store");
  app.add_option("--token", g.token, "Bearer token for --server (default: $FLOWHUB_TOKEN)");
  app.add_option("--as", g.as_user, "Local operation: act as this user instead of the operator");
  app.add_flag("--json", g.json_out, "Print raw JSON responses");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP server");
  std::string host = "127.0.0.1";
  int port = -1;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (default from config; 0 picks a free one)");

  // register
  auto* reg = app.add_subcommand("register", "Register a workflow");
  std::string upload_dir, git_remote, git_ref, crate_file, main_path, title, license, metadata_file;
  std::vector<std::string> reg_teams;
  bool dry_run = false;
  auto* src = reg->add_option_group("source");
  src->add_option("--upload", upload_dir, "Directory (or single file) to upload");
  src->add_option("--git", git_remote, "Git remote (https, file:// or local path)");
  src->add_option("--crate", crate_file, "Workflow RO-Crate zip");
  src->require_option(1);
  reg->add_option("--ref", git_ref, "Git branch or tag");
  reg->add_option("--main", main_path, "Main workflow file");
  reg->add_option("--team", reg_teams, "Owning team id (repeatable)");
  reg->add_option("--title", title, "Title override");
  reg->add_option("--license", license, "SPDX license id");
  reg->add_option("--metadata", metadata_file, "JSON file with further metadata fields");
  reg->add_flag("--dry-run", dry_run, "Show the prefilled entry without registering");

  // sync
  auto* sync = app.add_subcommand("sync", "Import new git releases of a workflow");
  std::string entry_id;
  sync->add_option("id", entry_id, "Workflow id")->required();

  // export-crate
  auto* exp = app.add_subcommand("export-crate", "Download a Workflow RO-Crate");
  std::string out_file;
  int version = 0;
  exp->add_option("id", entry_id, "Workflow id")->required();
  exp->add_option("--version", version, "Version (default: latest)");
  exp->add_option("-o,--output", out_file, "Output file")->required();

  // validate-crate
  auto* val = app.add_subcommand("validate-crate", "Check a Workflow RO-Crate zip");
  std::string validate_file;
  val->add_option("file", validate_file, "Crate zip")->required();

  // search
  auto* search = app.add_subcommand("search", "Search workflows");
  std::string query, sort, order;
  std::vector<std::string> facets;
  int page = 1, page_size = 20;
  search->add_option("query", query, "Free text");
  search->add_option("--facet", facets, "name=value filter (repeatable)");
  search->add_option("--sort", sort, "title, created, updated, views or downloads");
  search->add_option("--order", order, "asc or desc");
  search->add_option("--page", page, "Page number");
  search->add_option("--page-size", page_size, "Results per page");

  // mint-doi
  auto* mint = app.add_subcommand("mint-doi", "Freeze a version and mint its DOI");
  mint->add_option("id", entry_id, "Workflow id")->required();
  mint->add_option("version", version, "Version")->required();

  // admin
  auto* admin = app.add_subcommand("admin", "Administrative commands");
  admin->require_subcommand(1);
  std::string name, description, space, user_id, display_name, orcid, password;
  std::vector<std::string> admins;
  auto* mk_space = admin->add_subcommand("create-space", "Create a space");
  mk_space->add_option("name", name)->required();
  mk_space->add_option("--description", description);
  mk_space->add_option("--admin", admins, "Space admin user id (repeatable)");
  auto* mk_team = admin->add_subcommand("create-team", "Create a team");
  mk_team->add_option("name", name)->required();
  mk_team->add_option("--space", space, "Space id (default: Independent Teams)");
  mk_team->add_option("--description", description);
  mk_team->add_option("--admin", admins, "Team admin user id (repeatable)");
  auto* mk_user = admin->add_subcommand("create-user", "Create a user");
  mk_user->add_option("id", user_id)->required();
  mk_user->add_option("--name", display_name);
  mk_user->add_option("--orcid", orcid);
  mk_user->add_option("--password", password);
  auto* mk_token = admin->add_subcommand("token", "Issue an API token");
  mk_token->add_option("user", user_id)->required();
  mk_token->add_option("--password", password, "Authenticate with the user's password");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*val) {
      const std::string archive = read_file(validate_file);
      ConformanceReport report = validate_crate(archive);
      json findings = json::array();
      for (const auto& f : report.findings)
        findings.push_back({{"severity", f.error ? "error" : "warning"}, {"code", f.code}, {"message", f.message}});
      json out{{"level", to_string(report.level)}, {"findings", findings}};
      if (report.level != ConformanceLevel::invalid) {
        try {
          CrateContents c = read_crate(archive);
          out["title"] = c.title;
          out["main_entity"] = c.main_workflow_path;
          out["class"] = c.workflow_class.value_or(std::string(kOtherClass));
        } catch (const Error& e) {
          out["level"] = "invalid";
          out["findings"].push_back({{"severity", "error"}, {"code", to_string(e.code())}, {"message", e.what()}});
        }
      }
      if (g.json_out) {
        std::cout << out.dump(2) << "\n";
      } else {
        std::cout << validate_file << ": " << out["level"].get<std::string>() << "\n";
        for (const auto& f : out["findings"])
          std::cout << "  " << f["severity"].get<std::string>() << " " << f["code"].get<std::string>() << ": "
                    << f["message"].get<std::string>() << "\n";
      }
      return out["level"] == "invalid" ? kValidation : kOk;
    }

    if (*serve) {
      if (!g.server.empty()) throw Error(ErrorCode::invalid_argument, "serve runs locally; drop --server");
      Config config = load_settings(g);
      RegistryOptions options;
      options.config = config;
      Registry registry(std::move(options));
      ApiService api(registry);
      HttpServer server(api, config.max_file_bytes() * 2 + 1024 * 1024);
      const int bound = server.bind(host, port < 0 ? config.port : port);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
      });
      server.run();
      g_stop = 1;
      watcher.join();
      return kOk;
    }

    auto transport = make_transport(g);

    if (*reg) {
      json source;
      if (!upload_dir.empty()) {
        source = {{"kind", "upload"}, {"files", upload_files(upload_dir)}};
        if (!main_path.empty()) source["main_path"] = main_path;
      } else if (!git_remote.empty()) {
        std::string remote = git_remote;
        if (fs::exists(remote)) remote = fs::absolute(remote).lexically_normal().string();
        source = {{"kind", "git"}, {"remote", remote}};
        if (!git_ref.empty()) source["ref"] = git_ref;
        if (!main_path.empty()) source["main_path"] = main_path;
      } else {
        source = {{"kind", "crate"}, {"archive_base64", base64::encode(read_file(crate_file))}};
      }
      json metadata = metadata_file.empty() ? json::object() : json::parse(read_file(metadata_file));
      if (!reg_teams.empty()) metadata["team_ids"] = reg_teams;
      if (!title.empty()) metadata["title"] = title;
      if (!license.empty()) metadata["license"] = license;
      json body{{"source", source}, {"metadata", metadata}, {"dry_run", dry_run}};
      ApiResponse res = transport->send(json_request("POST", "/workflows", body));
      return finish(g, res, [&](const json& j) {
        const json& e = j["entry"];
        if (dry_run) {
          std::cout << "draft: " << e.value("title", "") << " [" << e.value("workflow_class", "") << "]\n";
          for (const auto& w : j["report"].value("errors", json::array()))
            std::cout << "  error " << w.value("code", "") << ": " << w.value("message", "") << "\n";
          json warn{{"warnings", j["report"].value("warnings", json::array())}, {"notes", j.value("notes", json::array())}};
          print_warnings(warn);
        } else {
          std::cout << "registered workflow " << e["id"] << ": " << e.value("title", "") << " ["
                    << e.value("workflow_class", "") << "]\n  " << e.value("url", "") << "\n";
          print_warnings(j);
        }
      });
    }

    if (*sync) {
      ApiResponse res = transport->send(json_request("POST", "/workflows/" + enc(entry_id) + "/sync", json::object()));
      return finish(g, res, [](const json& j) {
        const json& items = j["new_versions"];
        std::cout << items.size() << " new version(s)\n";
        for (const auto& v : items)
          std::cout << "  version " << v["version"] << ": " << v.value("revision_comment", "") << "\n";
      });
    }

    if (*exp) {
      std::string target = "/workflows/" + enc(entry_id) + "/ro_crate";
      if (version > 0) target += "?version=" + std::to_string(version);
      ApiResponse res = transport->send(ApiRequest::make("GET", target));
      if (res.status != 200) return report_error(res);
      write_file(out_file, res.body);
      if (g.json_out) std::cout << json{{"path", out_file}, {"bytes", res.body.size()}}.dump() << "\n";
      else std::cout << "wrote " << out_file << " (" << res.body.size() << " bytes)\n";
      return kOk;
    }

    if (*search) {
      ApiRequest req = ApiRequest::make("GET", "/search");
      if (!query.empty()) req.query.emplace_back("q", query);
      for (const auto& f : facets) req.query.emplace_back("facet", f);
      if (!sort.empty()) req.query.emplace_back("sort", sort);
      if (!order.empty()) req.query.emplace_back("order", order);
      req.query.emplace_back("page", std::to_string(page));
      req.query.emplace_back("page_size", std::to_string(page_size));
      ApiResponse res = transport->send(req);
      return finish(g, res, [](const json& j) {
        std::cout << j["total"] << " result(s)\n";
        for (const auto& h : j["hits"])
          std::cout << "  " << h["id"] << "\t" << h.value("workflow_class", "") << "\t" << h.value("title", "") << "\n";
      });
    }

    if (*mint) {
      ApiResponse res = transport->send(
          json_request("POST", "/workflows/" + enc(entry_id) + "/versions/" + std::to_string(version) + "/doi", json::object()));
      return finish(g, res, [](const json& j) { std::cout << "doi: " << j.value("doi", "") << "\n"; });
    }

    if (*mk_space) {
      json body{{"name", name}, {"description", description}, {"admin_user_ids", admins}};
      return finish(g, transport->send(json_request("POST", "/spaces", body)),
                    [](const json& j) { std::cout << "created space " << j.value("id", "") << "\n"; });
    }
    if (*mk_team) {
      json members = json::array();
      for (const auto& a : admins) members.push_back({{"user_id", a}, {"role", "admin"}});
      json body{{"name", name}, {"description", description}, {"members", members}};
      if (!space.empty()) body["space_id"] = space;
      return finish(g, transport->send(json_request("POST", "/teams", body)),
                    [](const json& j) { std::cout << "created team " << j.value("id", "") << "\n"; });
    }
    if (*mk_user) {
      json body{{"id", user_id}, {"display_name", display_name.empty() ? user_id : display_name}};
      if (!orcid.empty()) body["orcid"] = orcid;
      if (!password.empty()) body["password"] = password;
      return finish(g, transport->send(json_request("POST", "/people", body)),
                    [](const json& j) { std::cout << "created user " << j.value("id", "") << "\n"; });
    }
    if (*mk_token) {
      ApiResponse res = password.empty()
                            ? transport->send(json_request("POST", "/people/" + enc(user_id) + "/tokens", json::object()))
                            : transport->send(json_request("POST", "/auth/token", {{"user_id", user_id}, {"password", password}}));
      return finish(g, res, [](const json& j) { std::cout << j.value("token", "") << "\n"; });
    }
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kTransport;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(http_status(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
