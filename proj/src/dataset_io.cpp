#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <set>
#include <string>
#include <system_error>

#include "metacenter/dataset.hpp"
#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

constexpr const char* kHeader = "trial,t,roll,pitch,yaw,mx,my,mz";

void append_double(std::string& line, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ConfigurationError("dataset line " + std::to_string(line_no) + ": bad number '" +
                             std::string(field) + "'");
  }
  return v;
}

template <typename Span, typename Samples>
std::vector<Span> split_trials(Samples& samples) {
  std::vector<Span> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i == samples.size() || samples[i].trial != samples[begin].trial) {
      out.emplace_back(samples.data() + begin, i - begin);
      begin = i;
    }
  }
  return out;
}

}  // namespace

std::vector<std::span<const LabeledSample>> RawDataset::trials() const {
  return split_trials<std::span<const LabeledSample>>(samples);
}

std::vector<std::span<LabeledSample>> RawDataset::trials() {
  return split_trials<std::span<LabeledSample>>(samples);
}

std::vector<int> RawDataset::trial_ids() const {
  std::vector<int> ids;
  for (const auto& t : trials()) ids.push_back(t.front().trial);
  return ids;
}

Labeler oracle_labeler(HullSpec hull) {
  return [hull = std::move(hull)](const AttitudeSample& a) { return metacenter_cm(hull, a); };
}

void write_dataset_csv(std::ostream& out, const RawDataset& data) {
  out << kHeader << (data.has_flags ? ",flagged\n" : "\n");
  std::string line;
  for (const auto& s : data.samples) {
    line = std::to_string(s.trial);
    for (double v : {s.attitude.t, s.attitude.roll, s.attitude.pitch, s.attitude.yaw, s.label.x,
                     s.label.y, s.label.z}) {
      line += ',';
      append_double(line, v);
    }
    if (data.has_flags) line += s.flagged ? ",1" : ",0";
    line += '\n';
    out << line;
  }
}

void write_dataset_csv(const std::filesystem::path& path, const RawDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  write_dataset_csv(out, data);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RawDataset read_dataset_csv(std::istream& in) {
  RawDataset data;
  std::string line;
  if (!std::getline(in, line)) throw ConfigurationError("dataset is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line == std::string(kHeader) + ",flagged") {
    data.has_flags = true;
  } else if (line != kHeader) {
    throw ConfigurationError("unexpected dataset header: " + line);
  }
  const std::size_t columns = data.has_flags ? 9 : 8;

  std::size_t line_no = 1;
  std::vector<std::string_view> fields;
  std::set<int> seen_trials;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != columns) {
      throw ConfigurationError("dataset line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " fields");
    }
    LabeledSample s;
    int trial = 0;
    const auto res = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), trial);
    if (res.ec != std::errc()) {
      throw ConfigurationError("dataset line " + std::to_string(line_no) + ": bad trial id");
    }
    s.trial = trial;
    s.attitude = {parse_double(fields[1], line_no), parse_double(fields[2], line_no),
                  parse_double(fields[3], line_no), parse_double(fields[4], line_no)};
    s.label = {parse_double(fields[5], line_no), parse_double(fields[6], line_no),
               parse_double(fields[7], line_no)};
    if (data.has_flags) {
      if (fields[8] != "0" && fields[8] != "1") {
        throw ConfigurationError("dataset line " + std::to_string(line_no) + ": flagged must be 0 or 1");
      }
      s.flagged = fields[8] == "1";
    }
    if (!data.samples.empty()) {
      const LabeledSample& prev = data.samples.back();
      if (prev.trial == s.trial && !(s.attitude.t > prev.attitude.t)) {
        throw ConfigurationError("dataset line " + std::to_string(line_no) +
                                 ": timestamps must increase within a trial");
      }
      if (prev.trial != s.trial && !seen_trials.insert(s.trial).second) {
        throw ConfigurationError("dataset line " + std::to_string(line_no) + ": trial " +
                                 std::to_string(s.trial) + " is not contiguous");
      }
    } else {
      seen_trials.insert(s.trial);
    }
    data.samples.push_back(s);
  }
  return data;
}

RawDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigurationError("cannot open dataset " + path.string());
  return read_dataset_csv(in);
}

}  // namespace metacenter
