#include "recipegpt/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

#include "recipegpt/error.hpp"
#include "recipegpt/rng.hpp"
#include "recipegpt/textnorm.hpp"

namespace recipegpt {

Rational Rational::make(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::kInvalidArgument, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  return g > 1 ? Rational{num / g, den / g} : Rational{num, den};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

}  // namespace recipegpt

namespace recipegpt::corpus {
namespace {

using json = nlohmann::json;
using textnorm::ascii_lower;

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

const std::unordered_set<std::string>& unit_lexicon() {
  static const std::unordered_set<std::string> units = [] {
    const std::vector<std::pair<std::string, std::string>> forms = {
        {"cup", "cups"},         {"tablespoon", "tablespoons"}, {"tbsp", "tbsps"},
        {"tbs", "tbl"},          {"teaspoon", "teaspoons"},     {"tsp", "tsps"},
        {"ounce", "ounces"},     {"oz", "ozs"},                 {"pound", "pounds"},
        {"lb", "lbs"},           {"gram", "grams"},             {"g", "gs"},
        {"kilogram", "kilograms"}, {"kg", "kgs"},               {"milliliter", "milliliters"},
        {"millilitre", "millilitres"}, {"ml", "mls"},           {"liter", "liters"},
        {"litre", "litres"},     {"l", "ls"},                   {"pinch", "pinches"},
        {"dash", "dashes"},      {"clove", "cloves"},           {"slice", "slices"},
        {"can", "cans"},         {"package", "packages"},       {"pkg", "pkgs"},
        {"quart", "quarts"},     {"qt", "qts"},                 {"pint", "pints"},
        {"pt", "pts"},           {"gallon", "gallons"},         {"stick", "sticks"},
        {"jar", "jars"},         {"bottle", "bottles"},         {"packet", "packets"},
        {"envelope", "envelopes"}, {"bag", "bags"},             {"box", "boxes"},
        {"container", "containers"}, {"handful", "handfuls"},   {"sprig", "sprigs"},
        {"bunch", "bunches"},    {"head", "heads"},             {"drop", "drops"},
        {"splash", "splashes"},  {"piece", "pieces"},           {"inch", "inches"},
    };
    std::unordered_set<std::string> out;
    for (const auto& [one, many] : forms) {
      out.insert(one);
      out.insert(many);
    }
    return out;
  }();
  return units;
}

std::string unit_key(std::string_view word) {
  std::string w = ascii_lower(word);
  while (!w.empty() && w.back() == '.') w.pop_back();
  return w;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

std::optional<std::int64_t> to_int(std::string_view s) {
  if (!all_digits(s) || s.size() > 9) return std::nullopt;
  return std::stoll(std::string(s));
}

std::optional<Rational> unicode_fraction(std::string_view s) {
  static const std::map<std::string, Rational, std::less<>> table = {
      {"½", {1, 2}}, {"⅓", {1, 3}}, {"⅔", {2, 3}}, {"¼", {1, 4}}, {"¾", {3, 4}},
      {"⅕", {1, 5}}, {"⅖", {2, 5}}, {"⅗", {3, 5}}, {"⅘", {4, 5}}, {"⅙", {1, 6}},
      {"⅚", {5, 6}}, {"⅛", {1, 8}}, {"⅜", {3, 8}}, {"⅝", {5, 8}}, {"⅞", {7, 8}},
  };
  if (auto it = table.find(s); it != table.end()) return it->second;
  return std::nullopt;
}

// A plain fraction: "1/2" or a unicode vulgar fraction.
std::optional<Rational> parse_fraction(std::string_view s) {
  if (auto u = unicode_fraction(s)) return u;
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto n = to_int(s.substr(0, slash));
  auto d = to_int(s.substr(slash + 1));
  if (!n || !d || *d == 0) return std::nullopt;
  return Rational::make(*n, *d);
}

std::optional<Rational> parse_number(std::string_view s) {
  if (auto i = to_int(s)) return Rational::make(*i, 1);
  if (auto f = parse_fraction(s)) return f;
  if (const auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = to_int(s.substr(0, dot));
    auto frac = s.substr(dot + 1);
    if (whole && all_digits(frac) && frac.size() <= 6) {
      std::int64_t den = 1;
      for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
      return Rational::make(*whole * den + std::stoll(std::string(frac)), den);
    }
  }
  // "1½"
  for (std::size_t cut = 1; cut < s.size(); ++cut) {
    if (!all_digits(s.substr(0, cut))) break;
    if (auto u = unicode_fraction(s.substr(cut))) return Rational::make(*to_int(s.substr(0, cut)), 1) + *u;
  }
  return std::nullopt;
}

// "1-2" or "1–2" as a single token; yields the lower bound.
std::optional<Rational> parse_range_token(std::string_view s) {
  for (std::string_view dash : {std::string_view("-"), std::string_view("\xE2\x80\x93")}) {
    const auto at = s.find(dash);
    if (at == std::string_view::npos || at == 0) continue;
    auto lo = parse_number(s.substr(0, at));
    auto hi = parse_number(s.substr(at + dash.size()));
    if (lo && hi) return lo;
  }
  return std::nullopt;
}

bool is_range_joiner(std::string_view s) { return s == "-" || s == "to" || s == "\xE2\x80\x93" || s == "or"; }

std::string strip_comments(std::string_view line) {
  std::string out;
  int depth = 0;
  for (char c : line) {
    if (c == '(') {
      ++depth;
      out += ' ';
      continue;
    }
    if (c == ')' && depth > 0) {
      --depth;
      continue;
    }
    if (depth == 0) out += c;
  }
  if (auto comma = out.find_first_of(",;"); comma != std::string::npos) out.erase(comma);
  return out;
}

const std::vector<std::string>& denylist() {
  static const std::vector<std::string> words = {"nutrition", "calories", "submitted by", "recipe by"};
  return words;
}

bool mentions_denylisted(std::string_view text) {
  const std::string lower = ascii_lower(text);
  return std::any_of(denylist().begin(), denylist().end(),
                     [&](const std::string& w) { return lower.find(w) != std::string::npos; });
}

const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> words = {
      "approx", "min", "mins", "hr", "hrs", "oz", "lb", "lbs", "tbsp", "tsp", "pkg", "qt",
      "pt", "fl", "deg", "temp", "e.g", "i.e", "dr", "mr", "mrs", "ms", "st", "no", "vs", "ca", "incl",
  };
  return words;
}

}  // namespace

bool is_unit_word(std::string_view word) { return unit_lexicon().count(unit_key(word)) != 0; }

IngredientLine parse_ingredient_line(std::string_view line) {
  if (trim(line).empty()) throw Error(ErrorCode::kInvalidArgument, "empty ingredient line");
  IngredientLine out;
  out.original = std::string(line);

  const std::vector<std::string> tokens = split_ws(strip_comments(line));
  std::size_t pos = 0;
  bool first_pass = true;
  // Strip quantity / unit / "of" prefixes until nothing more comes off, so the
  // resulting name phrase is a fixed point of this procedure.
  for (;;) {
    const std::size_t pass_start = pos;
    bool took_quantity = false;
    while (pos < tokens.size()) {
      const std::string lower = ascii_lower(tokens[pos]);
      std::optional<Rational> q;
      if ((lower == "a" || lower == "an") && pos + 1 < tokens.size() && is_unit_word(tokens[pos + 1])) {
        q = Rational{1, 1};
        ++pos;
      } else if (auto r = parse_range_token(tokens[pos])) {
        q = r;
        ++pos;
      } else if (auto n = parse_number(tokens[pos])) {
        q = n;
        ++pos;
        if (n->den == 1 && pos < tokens.size()) {
          if (auto f = parse_fraction(tokens[pos])) {
            q = *q + *f;
            ++pos;
          }
        }
        if (pos + 1 < tokens.size() && is_range_joiner(ascii_lower(tokens[pos])) && parse_number(tokens[pos + 1])) {
          pos += 2;
        }
      } else {
        break;
      }
      if (first_pass && !out.quantity) out.quantity = q;
      took_quantity = true;
    }
    bool took_unit = false;
    if (pos < tokens.size() && is_unit_word(tokens[pos]) &&
        (took_quantity || (pos + 1 < tokens.size() && ascii_lower(tokens[pos + 1]) == "of"))) {
      if (first_pass && !out.unit) out.unit = unit_key(tokens[pos]);
      ++pos;
      took_unit = true;
    }
    if (took_unit && pos < tokens.size() && ascii_lower(tokens[pos]) == "of") ++pos;
    if (pos == pass_start) break;
    first_pass = false;
  }

  std::string phrase;
  for (std::size_t i = pos; i < tokens.size(); ++i) {
    if (!phrase.empty()) phrase += ' ';
    phrase += tokens[i];
  }
  while (!phrase.empty() && (phrase.back() == '.' || phrase.back() == ':' || phrase.back() == '-')) phrase.pop_back();
  phrase = trim(phrase);

  const auto words = textnorm::word_tokenize(phrase);
  if (std::none_of(words.tokens.begin(), words.tokens.end(), [](const std::string& t) { return textnorm::is_word_token(t); })) {
    throw Error(ErrorCode::kEmptyAfterStripping, "nothing left after stripping quantity/unit/comments: '" + std::string(line) + "'");
  }
  out.name_phrase = std::move(phrase);
  out.root_noun = textnorm::root_noun_of_phrase(out.name_phrase);
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 < text.size() && !is_space(static_cast<unsigned char>(text[i + 1]))) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space(static_cast<unsigned char>(text[w - 1]))) --w;
      std::string word = ascii_lower(text.substr(w, i - w));
      while (!word.empty() && (word.front() == '(' || word.front() == '"')) word.erase(word.begin());
      if (abbreviations().count(word)) continue;
    }
    std::string sentence = trim(text.substr(start, i + 1 - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = i + 1;
  }
  std::string rest = trim(text.substr(std::min(start, text.size())));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

std::size_t count_words(std::string_view text) { return split_ws(text).size(); }

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::kNonRecipeContent: return "non_recipe_content";
    case RejectReason::kTooFewIngredients: return "too_few_ingredients";
    case RejectReason::kTooFewSentences: return "too_few_sentences";
    case RejectReason::kTooFewWords: return "too_few_words";
  }
  return "unknown";
}

FilterResult filter_recipe(const RawRecipe& raw, const FilterRules& rules) {
  if (trim(raw.title).empty() || mentions_denylisted(raw.instruction_text) ||
      std::any_of(raw.ingredient_lines.begin(), raw.ingredient_lines.end(), mentions_denylisted)) {
    return RejectReason::kNonRecipeContent;
  }
  RecipeRecord rec;
  rec.id = raw.source_id;
  rec.title = trim(raw.title);
  for (const auto& line : raw.ingredient_lines) {
    try {
      rec.ingredients.push_back(parse_ingredient_line(line));
    } catch (const Error&) {
      // pure quantity or comment lines are dropped
    }
  }
  if (rec.ingredients.size() < rules.min_ingredients) return RejectReason::kTooFewIngredients;
  rec.steps = split_sentences(raw.instruction_text);
  if (rec.steps.size() < rules.min_sentences) return RejectReason::kTooFewSentences;
  if (count_words(raw.instruction_text) < rules.min_words) return RejectReason::kTooFewWords;
  return rec;
}

CorpusSplit split_corpus(const std::vector<RecipeRecord>& records, std::uint64_t seed,
                         std::size_t n_val, std::size_t n_test) {
  if (n_val + n_test >= records.size()) {
    throw Error(ErrorCode::kInsufficientCorpus,
                "need more than " + std::to_string(n_val + n_test) + " records, have " +
                    std::to_string(records.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.id);
  std::sort(ids.begin(), ids.end());

  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[bounded(rng, i)]);
  }
  CorpusSplit split;
  split.seed = seed;
  split.validation.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val),
                    ids.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  split.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), ids.end());
  return split;
}

IngestResult ingest_text(std::string_view contents) {
  IngestResult out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    const std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    auto problem = [&](std::string msg) { out.problems.push_back({line_no, std::move(msg)}); };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      problem("not a JSON object");
      continue;
    }
    if (!j.contains("id") || !j["id"].is_string() || trim(j["id"].get<std::string>()).empty()) {
      problem("missing or invalid \"id\"");
      continue;
    }
    if (!j.contains("title") || !j["title"].is_string() || trim(j["title"].get<std::string>()).empty()) {
      problem("missing or empty \"title\"");
      continue;
    }
    if (!j.contains("ingredients") || !j["ingredients"].is_array() ||
        !std::all_of(j["ingredients"].begin(), j["ingredients"].end(), [](const json& v) { return v.is_string(); })) {
      problem("\"ingredients\" must be an array of strings");
      continue;
    }
    if (!j.contains("instructions") || !j["instructions"].is_string()) {
      problem("missing or invalid \"instructions\"");
      continue;
    }
    RawRecipe r;
    r.source_id = j["id"].get<std::string>();
    r.title = j["title"].get<std::string>();
    r.ingredient_lines = j["ingredients"].get<std::vector<std::string>>();
    r.instruction_text = j["instructions"].get<std::string>();
    out.recipes.push_back(std::move(r));
  }
  return out;
}

IngestResult ingest(const std::string& path) { return ingest_text(read_file(path)); }

std::vector<RawRecipe> ingest_strict(const std::string& path) {
  auto result = ingest(path);
  if (!result.problems.empty()) {
    throw MalformedRecordError(result.problems.front().line, result.problems.front().message);
  }
  return std::move(result.recipes);
}

namespace {

json line_to_json(const IngredientLine& l) {
  return json{{"original", l.original},
              {"name", l.name_phrase},
              {"quantity", l.quantity ? json(l.quantity->str()) : json(nullptr)},
              {"unit", l.unit ? json(*l.unit) : json(nullptr)},
              {"root", l.root_noun}};
}

std::optional<Rational> rational_from_string(const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return Rational::make(std::stoll(s), 1);
  return Rational::make(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

}  // namespace

std::string record_to_json_line(const RecipeRecord& record) {
  json ingredients = json::array();
  for (const auto& l : record.ingredients) ingredients.push_back(line_to_json(l));
  json j{{"id", record.id}, {"title", record.title}, {"ingredients", ingredients}, {"steps", record.steps}};
  return j.dump();
}

RecipeRecord record_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    RecipeRecord r;
    r.id = j.at("id").get<std::string>();
    r.title = j.at("title").get<std::string>();
    for (const auto& li : j.at("ingredients")) {
      IngredientLine l;
      l.original = li.at("original").get<std::string>();
      l.name_phrase = li.at("name").get<std::string>();
      if (!li.at("quantity").is_null()) l.quantity = rational_from_string(li.at("quantity").get<std::string>());
      if (!li.at("unit").is_null()) l.unit = li.at("unit").get<std::string>();
      l.root_noun = li.at("root").get<std::string>();
      r.ingredients.push_back(std::move(l));
    }
    r.steps = j.at("steps").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad record line: ") + e.what());
  }
}

void write_records(const std::string& path, const std::vector<RecipeRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json_line(r);
    out += '\n';
  }
  write_file_atomic(path, out);
}

std::vector<RecipeRecord> read_records(const std::string& path) {
  const std::string contents = read_file(path);
  std::vector<RecipeRecord> out;
  std::istringstream in(contents);
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) out.push_back(record_from_json_line(line));
  }
  return out;
}

void write_split(const std::string& path, const CorpusSplit& split, const std::string& corpus_hash) {
  json j{{"format", "recipegpt-split/1"},
         {"seed", split.seed},
         {"corpus_hash", corpus_hash},
         {"train", split.train},
         {"validation", split.validation},
         {"test", split.test}};
  write_file_atomic(path, j.dump(2) + "\n");
}

CorpusSplit read_split(const std::string& path, std::string* corpus_hash) {
  try {
    const json j = json::parse(read_file(path));
    if (j.at("format") != "recipegpt-split/1") throw Error(ErrorCode::kFormat, "unknown split format in " + path);
    CorpusSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    if (corpus_hash) *corpus_hash = j.at("corpus_hash").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "bad split manifest " + path + ": " + e.what());
  }
}

std::string records_path(const std::string& dir) { return (std::filesystem::path(dir) / "records.jsonl").string(); }
std::string split_path(const std::string& dir) { return (std::filesystem::path(dir) / "split.json").string(); }

PreparedCorpus load_prepared(const std::string& dir) {
  PreparedCorpus pc;
  const std::string contents = read_file(records_path(dir));
  pc.corpus_hash = hex64(fnv1a64(contents));
  pc.records = read_records(records_path(dir));
  std::string recorded;
  pc.split = read_split(split_path(dir), &recorded);
  if (recorded != pc.corpus_hash) {
    throw Error(ErrorCode::kFormat, "split manifest was written for corpus " + recorded + " but records hash to " +
                                        pc.corpus_hash + "; rerun prepare");
  }
  return pc;
}

const RecipeRecord& PreparedCorpus::by_id(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return r;
  }
  throw Error(ErrorCode::kNotFound, "no record with id " + std::string(id));
}

std::vector<RecipeRecord> PreparedCorpus::select(const std::vector<std::string>& ids) const {
  std::map<std::string_view, const RecipeRecord*> index;
  for (const auto& r : records) index[r.id] = &r;
  std::vector<RecipeRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorCode::kNotFound, "split references unknown id " + id);
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace recipegpt::corpus
