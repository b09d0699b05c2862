#include "bite/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "bite/errors.hpp"
#include "json.hpp"

namespace bite {

using ordered_json = nlohmann::ordered_json;

bool LabeledDataset::has_label(std::string_view label) const {
  return std::binary_search(label_space.begin(), label_space.end(), label, std::less<>{});
}

std::size_t LabeledDataset::count_label(std::string_view label) const {
  return static_cast<std::size_t>(
      std::count_if(instances.begin(), instances.end(), [&](const Instance& x) { return x.label == label; }));
}

void LabeledDataset::validate() const {
  if (!std::is_sorted(label_space.begin(), label_space.end()) ||
      std::adjacent_find(label_space.begin(), label_space.end()) != label_space.end()) {
    throw ParseError("label space must be sorted and unique");
  }
  if (!target_label.empty() && !has_label(target_label)) {
    throw UnknownLabelError("target label '" + target_label + "' is not in the label space");
  }
  std::set<std::int64_t> ids;
  for (const Instance& x : instances) {
    if (!has_label(x.label)) throw UnknownLabelError("instance label '" + x.label + "' is not in the label space");
    if (!ids.insert(x.id).second) throw ParseError("duplicate instance id " + std::to_string(x.id));
  }
}

void refresh_label_space(LabeledDataset& ds) {
  std::set<std::string> labels;
  for (const Instance& x : ds.instances) labels.insert(x.label);
  ds.label_space.assign(labels.begin(), labels.end());
  if (ds.target_label.empty() || !ds.has_label(ds.target_label)) {
    ds.target_label = ds.label_space.empty() ? std::string{} : ds.label_space.front();
  }
}

LabeledDataset make_dataset(std::vector<std::pair<Tokens, std::string>> records) {
  LabeledDataset ds;
  ds.instances.reserve(records.size());
  std::int64_t id = 0;
  for (auto& [tokens, label] : records) {
    Instance x;
    x.id = id++;
    x.original_length = tokens.size();
    x.tokens = std::move(tokens);
    x.label = std::move(label);
    ds.instances.push_back(std::move(x));
  }
  refresh_label_space(ds);
  return ds;
}

LabeledDataset make_dataset(const std::vector<std::pair<std::string, std::string>>& records) {
  std::vector<std::pair<Tokens, std::string>> tokenized;
  tokenized.reserve(records.size());
  for (const auto& [text, label] : records) tokenized.emplace_back(tokenize(text), label);
  return make_dataset(std::move(tokenized));
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? DatasetFormat::tsv : DatasetFormat::jsonl;
}

std::string escape_tsv_field(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_tsv_field(std::string_view field, std::size_t line) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] != '\\') {
      out.push_back(field[i]);
      continue;
    }
    if (i + 1 == field.size()) throw ParseError("dangling backslash escape", line);
    switch (field[++i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: throw ParseError(std::string("unknown escape \\") + field[i], line);
    }
  }
  return out;
}

namespace {

Instance parse_jsonl_record(const std::string& line, std::size_t line_no) {
  ordered_json record;
  try {
    record = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!record.is_object()) throw ParseError("record is not a JSON object", line_no);
  auto text_it = record.find("text");
  auto label_it = record.find("label");
  if (text_it == record.end() || !text_it->is_string()) throw ParseError("missing string field \"text\"", line_no);
  if (label_it == record.end() || !label_it->is_string()) throw ParseError("missing string field \"label\"", line_no);

  Instance x;
  x.tokens = tokenize(text_it->get<std::string>());
  x.label = label_it->get<std::string>();
  if (x.tokens.empty()) throw ParseError("empty text", line_no);
  if (x.label.empty()) throw ParseError("empty label", line_no);
  for (auto it = record.begin(); it != record.end(); ++it) {
    if (it.key() != "text" && it.key() != "label") x.extra_fields.emplace_back(it.key(), it.value().dump());
  }
  return x;
}

Instance parse_tsv_record(std::string_view line, std::size_t line_no) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
    throw ParseError("expected exactly two tab-separated columns", line_no);
  }
  Instance x;
  x.tokens = tokenize(unescape_tsv_field(line.substr(0, tab), line_no));
  x.label = unescape_tsv_field(line.substr(tab + 1), line_no);
  if (x.tokens.empty()) throw ParseError("empty text", line_no);
  if (x.label.empty()) throw ParseError("empty label", line_no);
  return x;
}

}  // namespace

LabeledDataset read_dataset(std::istream& in, DatasetFormat format) {
  LabeledDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Instance x = format == DatasetFormat::jsonl ? parse_jsonl_record(line, line_no) : parse_tsv_record(line, line_no);
    x.id = static_cast<std::int64_t>(ds.instances.size());
    x.original_length = x.tokens.size();
    ds.instances.push_back(std::move(x));
  }
  if (ds.instances.empty()) throw EmptyDatasetError("dataset has no records");
  refresh_label_space(ds);
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_dataset(in, format);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e);
  } catch (const EmptyDatasetError&) {
    throw EmptyDatasetError(path.string() + ": dataset has no records");
  }
}

LabeledDataset load_dataset(const std::filesystem::path& path) { return load_dataset(path, format_from_path(path)); }

void write_dataset(std::ostream& out, const LabeledDataset& ds, DatasetFormat format) {
  for (const Instance& x : ds.instances) {
    const std::string text = detokenize(x.tokens);
    if (format == DatasetFormat::tsv) {
      out << escape_tsv_field(text) << '\t' << escape_tsv_field(x.label) << '\n';
      continue;
    }
    ordered_json record;
    record["text"] = text;
    record["label"] = x.label;
    for (const auto& [key, value] : x.extra_fields) record[key] = ordered_json::parse(value);
    out << record.dump() << '\n';
  }
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset(out, ds, format);
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

void save_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  save_dataset(ds, path, format_from_path(path));
}

std::size_t FrequencyTable::freq(std::string_view word) const {
  auto it = f.find(word);
  return it == f.end() ? 0 : it->second;
}

std::size_t FrequencyTable::freq_target(std::string_view word) const {
  auto it = f_target.find(word);
  return it == f_target.end() ? 0 : it->second;
}

std::vector<std::string> FrequencyTable::vocabulary() const {
  std::vector<std::string> words;
  words.reserve(f.size());
  for (const auto& [w, count] : f) {
    if (count > 0) words.push_back(w);
  }
  std::sort(words.begin(), words.end());
  return words;
}

std::vector<std::string> distinct_tokens(const Tokens& tokens) {
  std::vector<std::string> words(tokens.begin(), tokens.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

FrequencyTable count_frequencies(const LabeledDataset& ds, CountScope scope, std::string_view target) {
  if (!ds.has_label(target)) throw UnknownLabelError("unknown target label '" + std::string(target) + "'");
  FrequencyTable table;
  for (const Instance& x : ds.instances) {
    if (scope == CountScope::poisonable_only && !x.poisonable) continue;
    const bool is_target = x.label == target;
    ++table.n;
    if (is_target) ++table.n_target;
    for (const std::string& w : distinct_tokens(x.tokens)) {
      ++table.f[w];
      if (is_target) ++table.f_target[w];
    }
  }
  return table;
}

FrequencyTable count_frequencies(const LabeledDataset& ds, CountScope scope) {
  return count_frequencies(ds, scope, ds.target_label);
}

std::vector<std::string> vocabulary(const LabeledDataset& ds) {
  std::set<std::string> words;
  for (const Instance& x : ds.instances) words.insert(x.tokens.begin(), x.tokens.end());
  return {words.begin(), words.end()};
}

}  // namespace bite
