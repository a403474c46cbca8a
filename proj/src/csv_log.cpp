#include "algd/csv_log.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace algd {
namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

double parse_real(const std::string& s, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::runtime_error("log parse error in " + path + ": '" + s + "'");
  return v;
}

}  // namespace

const char* EpochLogger::header() {
  return "epoch,env_steps,train_return,train_episode_cost,eval_return,eval_episode_cost,"
         "lambda,score_loss,q_loss,qc_loss,mean_ess";
}

EpochLogger::EpochLogger(const std::string& path) : path_(path), out_(path, std::ios::trunc) {
  if (!out_) throw std::runtime_error("log: cannot open " + path);
  out_ << header() << "\n";
  out_.flush();
  if (!out_) throw std::runtime_error("log: write failed on " + path);
}

void EpochLogger::write(const EpochLogRow& row) {
  char head[64];
  std::snprintf(head, sizeof(head), "%" PRId64 ",%" PRIu64, row.epoch, row.env_steps);
  out_ << head << ',' << fmt_real(row.train_return) << ',' << fmt_real(row.train_episode_cost)
       << ',' << fmt_real(row.eval_return) << ',' << fmt_real(row.eval_episode_cost) << ','
       << fmt_real(row.lambda) << ',' << fmt_real(row.score_loss) << ',' << fmt_real(row.q_loss)
       << ',' << fmt_real(row.qc_loss) << ',' << fmt_real(row.mean_ess) << '\n';
  out_.flush();
  if (!out_) throw std::runtime_error("log: write failed on " + path_);
}

std::vector<EpochLogRow> EpochLogger::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("log: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != header())
    throw std::runtime_error("log: bad header in " + path);
  std::vector<EpochLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 11) throw std::runtime_error("log: bad row in " + path + ": " + line);
    EpochLogRow r;
    r.epoch = static_cast<std::int64_t>(std::strtoll(cells[0].c_str(), nullptr, 10));
    r.env_steps = static_cast<std::uint64_t>(std::strtoull(cells[1].c_str(), nullptr, 10));
    r.train_return = parse_real(cells[2], path);
    r.train_episode_cost = parse_real(cells[3], path);
    r.eval_return = parse_real(cells[4], path);
    r.eval_episode_cost = parse_real(cells[5], path);
    r.lambda = parse_real(cells[6], path);
    r.score_loss = parse_real(cells[7], path);
    r.q_loss = parse_real(cells[8], path);
    r.qc_loss = parse_real(cells[9], path);
    r.mean_ess = parse_real(cells[10], path);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace algd
