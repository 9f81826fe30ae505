#include <CLI11.hpp>

#include <iostream>

#include "saz/tools.hpp"

namespace {

struct WindowArgs {
  std::string dn, day, start, end;
};

void add_window_args(CLI::App* cmd, WindowArgs& w) {
  cmd->add_option("dn", w.dn)->required();
  cmd->add_option("day", w.day, "0-6 or Mon..Sun")->required();
  cmd->add_option("start", w.start, "HH:MM or minutes")->required();
  cmd->add_option("end", w.end, "HH:MM or minutes")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SAZ policy store administration"};
  std::string store;
  app.add_option("--store", store, "policy journal")->required();
  app.require_subcommand(1);

  std::string dn, note;
  auto* add = app.add_subcommand("add", "allow a DN");
  add->add_option("dn", dn)->required();
  add->add_option("note", note);
  auto* remove = app.add_subcommand("remove", "revoke a DN");
  remove->add_option("dn", dn)->required();
  auto* list = app.add_subcommand("list", "print allowed DNs");
  WindowArgs w;
  auto* wadd = app.add_subcommand("window-add", "allow a DN during a weekly UTC time window");
  add_window_args(wadd, w);
  auto* wdel = app.add_subcommand("window-remove", "remove a time window");
  add_window_args(wdel, w);
  auto* compact = app.add_subcommand("compact", "rewrite the journal minimally");
  CLI11_PARSE(app, argc, argv);

  saz::AdminCommand cmd = saz::admin::List{};
  if (add->parsed()) cmd = saz::admin::Add{dn, note};
  if (remove->parsed()) cmd = saz::admin::Remove{dn};
  if (list->parsed()) cmd = saz::admin::List{};
  if (compact->parsed()) cmd = saz::admin::Compact{};
  if (wadd->parsed() || wdel->parsed()) {
    auto day = saz::parse_day(w.day);
    auto start = saz::parse_minute(w.start);
    auto end = saz::parse_minute(w.end);
    if (!day || !start || !end) {
      std::cerr << "saz-admin: bad window (day 0-6 or Mon..Sun, times HH:MM)\n";
      return 1;
    }
    if (wadd->parsed())
      cmd = saz::admin::WindowAdd{w.dn, *day, *start, *end};
    else
      cmd = saz::admin::WindowRemove{w.dn, *day, *start, *end};
  }

  auto result = saz::run_admin(cmd, store, saz::system_now());
  std::cout << result.out;
  std::cerr << result.err;
  return result.exit_code;
}
