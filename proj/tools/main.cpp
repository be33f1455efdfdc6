#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fkdyn/fkdyn.h"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kPrecondition = 2, kInconclusive = 3, kInternal = 4 };

int exit_code(fkdyn_status s) {
  switch (s) {
    case FKDYN_OK: return kOk;
    case FKDYN_E_INVALID_ARGUMENT: return kUsage;
    case FKDYN_E_INCONCLUSIVE: return kInconclusive;
    case FKDYN_E_INTERNAL: return kInternal;
    default: return kPrecondition;
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary);
  out << data;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

struct Sub {
  std::string name;
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::vector<std::string> names;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-cluster dynamics experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(fkdyn_version()));
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "output directory (FKDYN_OUT overrides)");

  std::vector<Sub> subs(fkdyn_command_count());
  for (size_t i = 0; i < subs.size(); ++i) {
    Sub& s = subs[i];
    s.name = fkdyn_command_name(i);
    s.app = app.add_subcommand(s.name, fkdyn_command_help(s.name.c_str()));
    s.app->add_option("--out", out_dir, "output directory (FKDYN_OUT overrides)");
    for (const auto& p : ojson::parse(fkdyn_command_params(s.name.c_str()))) {
      const std::string name = p["name"], def = p["default"], help = p["help"];
      s.names.push_back(name);
      std::string& slot = s.values[name];
      if (def == "true" || def == "false")
        s.app->add_flag("--" + name + "{true}", slot, help)->default_str(def);
      else
        s.app->add_option("--" + name, slot, help)->default_str(def);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  Sub* chosen = nullptr;
  for (auto& s : subs)
    if (s.app->parsed()) chosen = &s;
  if (!chosen) return kUsage;

  if (const char* env = std::getenv("FKDYN_OUT"); env && *env) out_dir = env;

  fkdyn_request* req = nullptr;
  if (fkdyn_request_new(chosen->name.c_str(), &req) != FKDYN_OK) {
    std::cerr << "error: " << fkdyn_last_error() << "\n";
    return kUsage;
  }
  for (const auto& name : chosen->names) {
    const CLI::Option* opt = chosen->app->get_option("--" + name);
    if (opt->count() > 0) fkdyn_request_set(req, name.c_str(), chosen->values[name].c_str());
  }

  const std::string started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  fkdyn_result* res = nullptr;
  const fkdyn_status st = fkdyn_run(req, &res);
  fkdyn_request_free(req);
  const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res) {
    std::cerr << "error (" << fkdyn_status_name(st) << "): " << fkdyn_last_error() << "\n";
    return exit_code(st);
  }

  const std::string csv = fkdyn_result_csv(res), json = fkdyn_result_json(res), line = fkdyn_result_line(res);
  fkdyn_result_free(res);
  try {
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    const std::string stem = chosen->name;
    write_file(dir / (stem + ".csv"), csv);
    write_file(dir / (stem + ".json"), json);
    const ojson doc = ojson::parse(json);
    ojson argv_j = ojson::array();
    for (int i = 0; i < argc; ++i) argv_j.push_back(argv[i]);
    ojson manifest = {{"command", stem},
                      {"params", doc["params"]},
                      {"seed", doc["params"]["seed"]},
                      {"version", fkdyn_version()},
                      {"argv", argv_j},
                      {"started", started},
                      {"finished", utc_now()},
                      {"runtime_s", runtime},
                      {"status", fkdyn_status_name(st)},
                      {"outputs",
                       {{stem + ".csv", {{"sha256", sha256_hex(csv)}}}, {stem + ".json", {{"sha256", sha256_hex(json)}}}}}};
    write_file(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  std::cout << line << "\n";
  return exit_code(st);
}
