// Eigen must precede httplib: <resolv.h> defines a `_res` macro that
// collides with Eigen parameter names.
#include "moodisp/service/calib_service.hpp"

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <iostream>

namespace {
httplib::Server* g_server = nullptr;
void stop(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration and A/B study server"};
  moodisp::service::ServiceOptions opts;
  std::string host = "127.0.0.1", config, ui;
  int port = 8080;
  app.add_option("--images", opts.image_dir, "Calibration image directory")->required()->check(CLI::ExistingDirectory);
  app.add_option("--calibration-log", opts.calibration_log, "Calibration record file (appended)")->required();
  app.add_option("--ab-log", opts.ab_log, "A/B record file (appended)");
  app.add_option("--pairs", opts.ab_pairs, "pairs.jsonl written by 'moodisp abtest make-pairs'")->check(CLI::ExistingFile);
  app.add_option("--trials", opts.trials_per_session, "Trials per session (0 = all)");
  app.add_option("--config", config, "Pipeline config file")->check(CLI::ExistingFile);
  app.add_option("--ui", ui, "Directory of static front-end files mounted at /")->check(CLI::ExistingDirectory);
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port (0 picks a free one)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!config.empty()) opts.config = moodisp::load_pipeline_config(config);
    moodisp::service::CalibrationService service(opts);
    httplib::Server server;
    service.mount(server);
    if (!ui.empty()) server.set_mount_point("/", ui);

    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      std::cerr << "error: cannot bind " << host << ':' << port << '\n';
      return 1;
    }
    g_server = &server;
    std::signal(SIGINT, stop);
    std::signal(SIGTERM, stop);
    std::cerr << "serving " << service.image_ids().size() << " images on http://" << host << ':'
              << bound << '\n';
    server.listen_after_bind();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
