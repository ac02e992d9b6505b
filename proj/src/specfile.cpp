#include "embedcap/specfile.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace embedcap {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::map<std::string, Entry> entries;
  int line = 0;
  bool used = false;
};

struct Document {
  std::map<std::string, Section> sections;  // "" is the top level

  Section* find(const std::string& name) {
    auto it = sections.find(name);
    if (it == sections.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw SpecError("spec line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Document tokenize(const std::string& text) {
  Document doc;
  doc.sections[""] = Section{};
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  // table values may continue over subsequent indented lines
  std::string pending_key;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string stripped = raw;
    if (auto pos = stripped.find('#'); pos != std::string::npos)
      stripped = stripped.substr(0, pos);
    const bool continuation = !stripped.empty() &&
                              (stripped[0] == ' ' || stripped[0] == '\t');
    std::string line = trim(stripped);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(line_no, "empty section name");
      if (doc.sections.count(current)) fail(line_no, "duplicate section [" + current + "]");
      doc.sections[current] = Section{{}, line_no, false};
      pending_key.clear();
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (continuation && !pending_key.empty()) {
        auto& e = doc.sections[current].entries[pending_key];
        e.value += " " + line;
        continue;
      }
      fail(line_no, "expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    auto& section = doc.sections[current];
    if (section.entries.count(key))
      fail(line_no, "duplicate key '" + key + "' in [" + current + "]");
    section.entries[key] = Entry{value, line_no, false};
    pending_key = key;
  }
  return doc;
}

class SectionReader {
 public:
  SectionReader(Section& s, std::string name) : s_(s), name_(std::move(name)) {}

  bool has(const std::string& key) const { return s_.entries.count(key) > 0; }

  std::string str(const std::string& key) {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end())
      fail(s_.line, "[" + name_ + "] missing required key '" + key + "'");
    it->second.used = true;
    return it->second.value;
  }

  std::optional<std::string> opt(const std::string& key) {
    auto it = s_.entries.find(key);
    if (it == s_.entries.end()) return std::nullopt;
    it->second.used = true;
    return it->second.value;
  }

  int line(const std::string& key) const {
    auto it = s_.entries.find(key);
    return it == s_.entries.end() ? s_.line : it->second.line;
  }

  double num(const std::string& key) {
    const std::string v = str(key);
    try {
      std::size_t used = 0;
      double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return d;
    } catch (...) {
      fail(line(key), "[" + name_ + "] " + key + ": expected a number, got '" + v + "'");
    }
  }

  long long integer(const std::string& key) {
    const double d = num(key);
    auto v = static_cast<long long>(d);
    if (static_cast<double>(v) != d)
      fail(line(key), "[" + name_ + "] " + key + ": expected an integer");
    return v;
  }

  std::vector<double> numbers(const std::string& key) {
    std::istringstream in(str(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument("");
      } catch (...) {
        fail(line(key), "[" + name_ + "] " + key + ": bad number '" + tok + "'");
      }
    }
    return out;
  }

  std::vector<std::string> words(const std::string& key) {
    std::istringstream in(str(key));
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
  }

  void finish() const {
    for (const auto& [key, entry] : s_.entries)
      if (!entry.used)
        fail(entry.line, "[" + name_ + "] unknown key '" + key + "'");
  }

 private:
  Section& s_;
  std::string name_;
};

struct AlphabetTable {
  std::map<std::string, int> sizes;
  int line = 0;

  Alphabet get(const std::string& name, int at_line) const {
    auto it = sizes.find(name);
    if (it == sizes.end())
      fail(at_line, "alphabet '" + name + "' is not declared in [alphabets]");
    return Alphabet{name, it->second};
  }
};

Kernel parse_kernel(Document& doc, const AlphabetTable& alphabets,
                    const std::string& section_name) {
  Section* s = doc.find(section_name);
  if (!s) throw SpecError("spec: missing required section [" + section_name + "]");
  SectionReader r(*s, section_name);
  std::vector<Alphabet> inputs, outputs;
  for (const auto& w : r.words("inputs")) inputs.push_back(alphabets.get(w, r.line("inputs")));
  for (const auto& w : r.words("outputs"))
    outputs.push_back(alphabets.get(w, r.line("outputs")));
  auto table = r.numbers("table");
  r.finish();
  try {
    return Kernel(std::move(inputs), std::move(outputs), std::move(table));
  } catch (const SpecError& e) {
    fail(s->line, "[" + section_name + "] " + e.what());
  }
}

DistortionMeasure parse_distortion(Document& doc, const AlphabetTable& alphabets,
                                   const std::string& section_name) {
  Section* s = doc.find(section_name);
  if (!s) throw SpecError("spec: missing required section [" + section_name + "]");
  SectionReader r(*s, section_name);
  const Alphabet host = alphabets.get(r.str("host"), r.line("host"));
  const Alphabet embed = alphabets.get(r.str("embed"), r.line("embed"));
  auto table = r.numbers("table");
  r.finish();
  try {
    return DistortionMeasure(host, embed, std::move(table));
  } catch (const SpecError& e) {
    fail(s->line, "[" + section_name + "] " + e.what());
  }
}

void parse_search(Document& doc, ProblemSpec& spec) {
  Section* s = doc.find("search");
  if (!s) return;
  SectionReader r(*s, "search");
  if (r.has("grid_denom")) spec.search.grid_denom = static_cast<int>(r.integer("grid_denom"));
  if (r.has("side")) {
    const std::string v = r.str("side");
    if (v == "inner")
      spec.side = BoundSide::inner;
    else if (v == "outer")
      spec.side = BoundSide::outer;
    else
      fail(r.line("side"), "[search] side must be 'inner' or 'outer'");
  }
  if (r.has("aux_u1")) spec.search.aux1 = static_cast<int>(r.integer("aux_u1"));
  if (r.has("aux_u2")) spec.search.aux2 = static_cast<int>(r.integer("aux_u2"));
  if (r.has("aux_u")) spec.search.aux_u = static_cast<int>(r.integer("aux_u"));
  if (r.has("aux_v")) spec.search.aux_v = static_cast<int>(r.integer("aux_v"));
  if (r.has("aux_w")) spec.search.aux_w = static_cast<int>(r.integer("aux_w"));
  if (r.has("max_exhaustive")) spec.search.max_exhaustive = r.integer("max_exhaustive");
  if (r.has("restarts")) spec.search.restarts = static_cast<int>(r.integer("restarts"));
  if (r.has("max_sweeps")) spec.search.max_sweeps = static_cast<int>(r.integer("max_sweeps"));
  if (r.has("lambdas")) spec.search.lambdas = r.numbers("lambdas");
  if (r.has("seed")) spec.search.seed = static_cast<std::uint64_t>(r.integer("seed"));
  r.finish();
  for (double l : spec.search.lambdas)
    if (l < 0.0 || l > 1.0) fail(s->line, "[search] lambdas must lie in [0,1]");
}

void parse_sim(Document& doc, ProblemSpec& spec) {
  Section* s = doc.find("sim");
  if (!s) return;
  SectionReader r(*s, "sim");
  if (r.has("n")) spec.sim.n = static_cast<int>(r.integer("n"));
  if (r.has("r1")) spec.sim.r1 = r.num("r1");
  if (r.has("r2")) spec.sim.r2 = r.num("r2");
  if (r.has("eps")) spec.sim.eps = r.num("eps");
  if (r.has("eps1")) spec.sim.eps1 = r.num("eps1");
  if (r.has("trials")) spec.sim.trials = static_cast<int>(r.integer("trials"));
  if (r.has("seed")) spec.sim.seed = static_cast<std::uint64_t>(r.integer("seed"));
  if (r.has("decode_budget")) spec.sim.decode_budget = r.integer("decode_budget");
  r.finish();
  if (spec.sim.n < 1) fail(s->line, "[sim] n must be >= 1");
  if (spec.sim.trials < 1) fail(s->line, "[sim] trials must be >= 1");
}

}  // namespace

ProblemSpec parse_spec(const std::string& text) {
  Document doc = tokenize(text);

  Section* top = doc.find("");
  SectionReader top_reader(*top, "top level");
  const std::string tag = top_reader.str("case");
  top_reader.finish();

  Section* alpha_section = doc.find("alphabets");
  if (!alpha_section) throw SpecError("spec: missing required section [alphabets]");
  AlphabetTable alphabets;
  alphabets.line = alpha_section->line;
  for (auto& [name, entry] : alpha_section->entries) {
    entry.used = true;
    int size = 0;
    try {
      size = std::stoi(entry.value);
    } catch (...) {
      fail(entry.line, "[alphabets] " + name + ": expected a positive integer");
    }
    if (size < 1) fail(entry.line, "[alphabets] " + name + ": size must be >= 1");
    alphabets.sizes[name] = size;
  }

  ProblemSpec spec;
  const bool is_mac = tag.rfind("MAC-", 0) == 0;
  const bool is_bc = tag.rfind("BC-", 0) == 0;
  if (!is_mac && !is_bc) fail(top_reader.line("case"), "unknown case tag '" + tag + "'");

  // host
  Section* host_section = doc.find("host");
  if (!host_section) throw SpecError("spec: missing required section [host]");
  SectionReader host_reader(*host_section, "host");
  auto host_axes = host_reader.words("axes");
  auto host_table = host_reader.numbers("table");
  host_reader.finish();

  if (is_mac) {
    MacCase mc;
    if (tag == "MAC-A")
      mc = MacCase::A;
    else if (tag == "MAC-B")
      mc = MacCase::B;
    else if (tag == "MAC-C")
      mc = MacCase::C;
    else
      fail(top_reader.line("case"), "unknown case tag '" + tag + "'");
    if (host_axes.size() != 2 || host_axes[0] != "s1" || host_axes[1] != "s2")
      fail(host_reader.line("axes"), "[host] MAC axes must be 's1 s2'");
    auto make_host = [&]() -> JointPmf {
      try {
        return JointPmf({alphabets.get("s1", alpha_section->line),
                         alphabets.get("s2", alpha_section->line)},
                        std::move(host_table));
      } catch (const SpecError& e) {
        fail(host_reader.line("table"), std::string("[host] ") + e.what());
      }
    };
    JointPmf host = make_host();
    Kernel channel = parse_kernel(doc, alphabets, "channel");
    DistortionMeasure d1 = parse_distortion(doc, alphabets, "distortion1");
    DistortionMeasure d2 = parse_distortion(doc, alphabets, "distortion2");

    Section* budget = doc.find("budget");
    if (!budget) throw SpecError("spec: missing required section [budget]");
    SectionReader budget_reader(*budget, "budget");
    const double delta1 = budget_reader.num("delta1");
    const double delta2 = budget_reader.num("delta2");
    budget_reader.finish();

    MacProblem p{std::move(host), std::move(channel), std::move(d1), std::move(d2),
                 delta1, delta2, mc};
    try {
      validate(p);
    } catch (const SpecError& e) {
      fail(host_section->line, e.what());
    }
    spec.problem = std::move(p);

    if (doc.sections.count("tuple.enc1") || doc.sections.count("tuple.enc2")) {
      Kernel e1 = parse_kernel(doc, alphabets, "tuple.enc1");
      Kernel e2 = parse_kernel(doc, alphabets, "tuple.enc2");
      spec.mac_tuple = MacInnerTuple{std::move(e1), std::move(e2)};
    }
  } else {
    BcCase bc;
    if (tag == "BC-A")
      bc = BcCase::Ap;
    else if (tag == "BC-B")
      bc = BcCase::Bp;
    else if (tag == "BC-C")
      bc = BcCase::Cp;
    else if (tag == "BC-D")
      bc = BcCase::Dp;
    else
      fail(top_reader.line("case"), "unknown case tag '" + tag + "'");
    if (host_axes.size() != 1 || host_axes[0] != "s")
      fail(host_reader.line("axes"), "[host] BC axis must be 's'");
    auto make_host = [&]() -> Pmf {
      try {
        return Pmf(alphabets.get("s", alpha_section->line), std::move(host_table));
      } catch (const SpecError& e) {
        fail(host_reader.line("table"), std::string("[host] ") + e.what());
      }
    };
    Pmf host = make_host();
    Kernel forward = parse_kernel(doc, alphabets, "channel.forward");
    Kernel degrade = parse_kernel(doc, alphabets, "channel.degrade");
    DistortionMeasure d = parse_distortion(doc, alphabets, "distortion");

    Section* budget = doc.find("budget");
    if (!budget) throw SpecError("spec: missing required section [budget]");
    SectionReader budget_reader(*budget, "budget");
    const double delta = budget_reader.num("delta");
    budget_reader.finish();

    BcProblem p{std::move(host), std::move(forward), std::move(degrade), std::move(d),
                delta, bc};
    try {
      validate(p);
    } catch (const SpecError& e) {
      fail(host_section->line, e.what());
    }
    spec.problem = std::move(p);

    if (doc.sections.count("tuple.enc"))
      spec.bc_tuple = BcTuple{parse_kernel(doc, alphabets, "tuple.enc")};
  }

  parse_search(doc, spec);
  parse_sim(doc, spec);

  for (const auto& [name, section] : doc.sections)
    if (!section.used && !name.empty())
      fail(section.line, "unknown section [" + name + "]");
  return spec;
}

ProblemSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

const char* case_tag(const ProblemSpec& spec) {
  if (spec.is_mac()) {
    switch (spec.mac().mac_case) {
      case MacCase::A: return "MAC-A";
      case MacCase::B: return "MAC-B";
      case MacCase::C: return "MAC-C";
    }
  }
  switch (spec.bc().bc_case) {
    case BcCase::Ap: return "BC-A";
    case BcCase::Bp: return "BC-B";
    case BcCase::Cp: return "BC-C";
    case BcCase::Dp: return "BC-D";
  }
  return "?";
}

namespace {

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit_table(std::ostringstream& out, std::span<const double> t) {
  out << "table =";
  for (double v : t) out << ' ' << fmt_full(v);
  out << '\n';
}

void emit_kernel(std::ostringstream& out, const std::string& name, const Kernel& k) {
  out << '[' << name << "]\n";
  out << "inputs =";
  for (const auto& a : k.inputs()) out << ' ' << a.name;
  out << "\noutputs =";
  for (const auto& a : k.outputs()) out << ' ' << a.name;
  out << '\n';
  emit_table(out, k.table());
}

void emit_distortion(std::ostringstream& out, const std::string& name,
                     const DistortionMeasure& d) {
  out << '[' << name << "]\n";
  out << "host = " << d.host_alphabet.name << '\n';
  out << "embed = " << d.embed_alphabet.name << '\n';
  emit_table(out, d.table);
}

}  // namespace

std::string serialize_spec(const ProblemSpec& spec) {
  std::ostringstream out;
  out << "case = " << case_tag(spec) << '\n';

  std::map<std::string, int> alphabets;
  auto note = [&alphabets](const Alphabet& a) { alphabets[a.name] = a.size; };
  if (spec.is_mac()) {
    const auto& p = spec.mac();
    for (const auto& a : p.host.axes()) note(a);
    for (const auto& a : p.channel.inputs()) note(a);
    for (const auto& a : p.channel.outputs()) note(a);
    if (spec.mac_tuple) {
      for (const auto& a : spec.mac_tuple->enc1.outputs()) note(a);
      for (const auto& a : spec.mac_tuple->enc2.outputs()) note(a);
    }
  } else {
    const auto& p = spec.bc();
    note(p.host.alphabet());
    for (const auto& a : p.forward.inputs()) note(a);
    for (const auto& a : p.forward.outputs()) note(a);
    for (const auto& a : p.degrade.outputs()) note(a);
    if (spec.bc_tuple)
      for (const auto& a : spec.bc_tuple->enc.outputs()) note(a);
  }
  out << "\n[alphabets]\n";
  for (const auto& [name, size] : alphabets) out << name << " = " << size << '\n';

  out << "\n[host]\n";
  if (spec.is_mac()) {
    out << "axes = s1 s2\n";
    emit_table(out, spec.mac().host.table());
  } else {
    out << "axes = s\n";
    emit_table(out, spec.bc().host.probs());
  }

  if (spec.is_mac()) {
    out << '\n';
    emit_kernel(out, "channel", spec.mac().channel);
    out << '\n';
    emit_distortion(out, "distortion1", spec.mac().d1);
    out << '\n';
    emit_distortion(out, "distortion2", spec.mac().d2);
    out << "\n[budget]\n";
    out << "delta1 = " << fmt_full(spec.mac().delta1) << '\n';
    out << "delta2 = " << fmt_full(spec.mac().delta2) << '\n';
  } else {
    out << '\n';
    emit_kernel(out, "channel.forward", spec.bc().forward);
    out << '\n';
    emit_kernel(out, "channel.degrade", spec.bc().degrade);
    out << '\n';
    emit_distortion(out, "distortion", spec.bc().d);
    out << "\n[budget]\n";
    out << "delta = " << fmt_full(spec.bc().delta) << '\n';
  }

  out << "\n[search]\n";
  out << "grid_denom = " << spec.search.grid_denom << '\n';
  out << "side = " << (spec.side == BoundSide::inner ? "inner" : "outer") << '\n';
  if (spec.is_mac()) {
    out << "aux_u1 = " << spec.search.aux1 << '\n';
    out << "aux_u2 = " << spec.search.aux2 << '\n';
  } else {
    out << "aux_u = " << spec.search.aux_u << '\n';
    out << "aux_v = " << spec.search.aux_v << '\n';
    out << "aux_w = " << spec.search.aux_w << '\n';
  }
  out << "max_exhaustive = " << spec.search.max_exhaustive << '\n';
  out << "restarts = " << spec.search.restarts << '\n';
  out << "max_sweeps = " << spec.search.max_sweeps << '\n';
  out << "lambdas =";
  for (double l : spec.search.lambdas) out << ' ' << fmt_full(l);
  out << '\n';
  out << "seed = " << spec.search.seed << '\n';

  out << "\n[sim]\n";
  out << "n = " << spec.sim.n << '\n';
  out << "r1 = " << fmt_full(spec.sim.r1) << '\n';
  out << "r2 = " << fmt_full(spec.sim.r2) << '\n';
  out << "eps = " << fmt_full(spec.sim.eps) << '\n';
  out << "eps1 = " << fmt_full(spec.sim.eps1) << '\n';
  out << "trials = " << spec.sim.trials << '\n';
  out << "seed = " << spec.sim.seed << '\n';
  out << "decode_budget = " << spec.sim.decode_budget << '\n';

  if (spec.mac_tuple) {
    out << '\n';
    emit_kernel(out, "tuple.enc1", spec.mac_tuple->enc1);
    out << '\n';
    emit_kernel(out, "tuple.enc2", spec.mac_tuple->enc2);
  }
  if (spec.bc_tuple) {
    out << '\n';
    emit_kernel(out, "tuple.enc", spec.bc_tuple->enc);
  }
  return out.str();
}

}  // namespace embedcap
