// Copyright 2026 nestmatch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "nestmatch/io.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <locale>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace nm {
namespace {

using nlohmann::json;

// Integers go through operator<<; pin the "C" locale so no grouping separators appear.
class ClassicLocale {
   public:
    explicit ClassicLocale(std::ios_base& stream) : stream_(stream), saved_(stream.imbue(std::locale::classic())) {}
    ~ClassicLocale() { stream_.imbue(saved_); }

   private:
    std::ios_base& stream_;
    std::locale saved_;
};

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        out.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

template <typename T>
T parse_int(std::string_view text) {
    text = trim(text);
    T v{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw FormatError("not an integer: '" + std::string(text) + "'");
    return v;
}

// Reads data rows after checking the header; blank lines are skipped.
template <typename F>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, F&& row) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != header)
        throw FormatError("expected CSV header '" + std::string(header) + "'");
    std::size_t number = 1;
    while (std::getline(in, line)) {
        number++;
        if (trim(line).empty()) continue;
        auto fields = split(trim(line));
        if (fields.size() != columns)
            throw FormatError("line " + std::to_string(number) + ": expected " + std::to_string(columns) + " fields");
        row(fields);
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed JSON: ") + e.what());
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (ec != std::errc{}) throw FormatError("cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    text = trim(text);
    double v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw FormatError("not a number: '" + std::string(text) + "'");
    return v;
}

LatticeSpec parse_lattice_config(std::string_view json_text) {
    json j = parse_json(json_text);
    LatticeSpec spec;
    auto count = [&](const char* key) {
        const json& v = j.at(key);
        if (!v.is_number_unsigned() || v.get<std::uint64_t>() > std::numeric_limits<std::uint32_t>::max())
            throw FormatError(std::string("invalid lattice config: ") + key + " must be a non-negative integer");
        return v.get<std::uint32_t>();
    };
    try {
        spec.lx = count("lx");
        spec.ly = count("ly");
        spec.rounds = count("rounds");
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.b_max = j.value("b_max", std::uint32_t{12});
        for (const json& c : j.at("stick_classes")) spec.stick_classes.push_back({c.at("kind").get<std::string>(), c.at("p").get<double>()});
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid lattice config: ") + e.what());
    }
    return spec;
}

LatticeSpec load_lattice_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_lattice_config(ss.str());
}

std::string lattice_config_json(const LatticeSpec& spec) {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out << "{\n  \"lx\": " << spec.lx << ",\n  \"ly\": " << spec.ly << ",\n  \"rounds\": " << spec.rounds
        << ",\n  \"seed\": " << spec.seed << ",\n  \"b_max\": " << spec.b_max << ",\n  \"stick_classes\": [";
    for (std::size_t i = 0; i < spec.stick_classes.size(); i++) {
        const StickClass& c = spec.stick_classes[i];
        out << (i ? ",\n" : "\n") << "    {\"kind\": " << json(c.kind).dump() << ", \"p\": " << format_double(c.p) << "}";
    }
    out << (spec.stick_classes.empty() ? "]\n}\n" : "\n  ]\n}\n");
    return out.str();
}

void write_events_csv(std::ostream& out, const std::vector<DetectionEvent>& events) {
    ClassicLocale classic(out);
    out << "ball_id,t\n";
    for (const DetectionEvent& e : events) out << e.ball << ',' << e.round << '\n';
}

std::vector<DetectionEvent> read_events_csv(std::istream& in) {
    std::vector<DetectionEvent> events;
    read_csv(in, "ball_id,t", 2, [&](const auto& f) {
        events.push_back({parse_int<BallId>(f[0]), parse_int<std::int32_t>(f[1])});
    });
    return events;
}

void write_matching_csv(std::ostream& out, const Matching& matching) {
    ClassicLocale classic(out);
    std::vector<MatchedEdge> rows = matching.pairs;
    rows.insert(rows.end(), matching.boundary_matches.begin(), matching.boundary_matches.end());
    std::sort(rows.begin(), rows.end(), [](const MatchedEdge& x, const MatchedEdge& y) { return x.a < y.a; });
    out << "event_a,event_b,weight\n";
    for (const MatchedEdge& e : rows) {
        out << e.a << ',';
        if (e.b == kBoundaryVertex) out << "BOUNDARY";
        else out << e.b;
        out << ',' << format_double(e.weight) << '\n';
    }
}

Matching read_matching_csv(std::istream& in) {
    Matching m;
    read_csv(in, "event_a,event_b,weight", 3, [&](const auto& f) {
        MatchedEdge e;
        e.a = parse_int<VertexId>(f[0]);
        e.weight = parse_double(f[2]);
        if (trim(f[1]) == "BOUNDARY") {
            e.b = kBoundaryVertex;
            m.boundary_matches.push_back(e);
        } else {
            e.b = parse_int<VertexId>(f[1]);
            if (e.b < e.a) std::swap(e.a, e.b);
            m.pairs.push_back(e);
        }
        m.total_weight += e.weight;
    });
    auto by_a = [](const MatchedEdge& x, const MatchedEdge& y) { return x.a < y.a; };
    std::sort(m.pairs.begin(), m.pairs.end(), by_a);
    std::sort(m.boundary_matches.begin(), m.boundary_matches.end(), by_a);
    return m;
}

void write_duals_json(std::ostream& out, const DualState& duals) {
    ClassicLocale classic(out);
    out << "{\n  \"singleton_y\": [";
    for (std::size_t i = 0; i < duals.singleton_y.size(); i++) out << (i ? ", " : "") << format_double(duals.singleton_y[i]);
    out << "],\n  \"blossoms\": [";
    for (std::size_t i = 0; i < duals.blossoms.size(); i++) {
        const DualSet& s = duals.blossoms[i];
        out << (i ? ",\n" : "\n") << "    {\"members\": [";
        for (std::size_t k = 0; k < s.members.size(); k++) out << (k ? ", " : "") << s.members[k];
        out << "], \"y\": " << format_double(s.y) << "}";
    }
    out << (duals.blossoms.empty() ? "]\n}\n" : "\n  ]\n}\n");
}

DualState read_duals_json(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    json j = parse_json(ss.str());
    DualState d;
    try {
        d.singleton_y = j.at("singleton_y").get<std::vector<double>>();
        for (const json& b : j.at("blossoms")) {
            DualSet s;
            s.members = b.at("members").get<std::vector<VertexId>>();
            s.y = b.at("y").get<double>();
            std::sort(s.members.begin(), s.members.end());
            d.blossoms.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("invalid duals: ") + e.what());
    }
    return d;
}

void write_balls_csv(std::ostream& out, const Nest& nest) {
    ClassicLocale classic(out);
    out << "ball_id,x,y,t\n";
    for (BallId b = 0; b < nest.num_balls(); b++) {
        Coords c = nest.coords(b);
        out << b << ',' << c.x << ',' << c.y << ',' << c.t << '\n';
    }
}

void write_sticks_csv(std::ostream& out, const Nest& nest) {
    ClassicLocale classic(out);
    out << "src,dst,p,w\n";
    nest.for_each_stick([&](StickId, const Stick& s) {
        out << s.a << ',';
        if (s.b == kBoundaryBall) out << -1;
        else out << s.b;
        out << ',' << format_double(s.p) << ',' << format_double(s.w) << '\n';
    });
}

void write_metrics_csv(std::ostream& out, const std::vector<RoundMetrics>& metrics) {
    ClassicLocale classic(out);
    out << "round,events,mean_backlog,max_backlog,stalls,messages,repairs,spills\n";
    for (const RoundMetrics& m : metrics) {
        out << m.round << ',' << m.events << ',' << format_double(m.mean_backlog) << ','
            << format_double(m.max_backlog) << ',' << m.stalls << ',' << m.messages << ',' << m.repairs << ','
            << m.spills << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const ClusterHistogram& hist) {
    ClassicLocale classic(out);
    out << "size,count\n";
    for (std::size_t s = 1; s < hist.counts.size(); s++)
        if (hist.counts[s]) out << s << ',' << hist.counts[s] << '\n';
}

void write_fit_json(std::ostream& out, const ExponentialFit& fit) {
    ClassicLocale classic(out);
    out << "{\"A_fit\": " << format_double(fit.A) << ", \"x_fit\": " << format_double(fit.x)
        << ", \"r2\": " << format_double(fit.r2) << ", \"points\": " << fit.points << "}\n";
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
    ClassicLocale classic(out);
    out << "L,events,seconds,seconds_per_event\n";
    for (const ScalingRow& r : rows)
        out << r.L << ',' << r.n_events << ',' << format_double(r.seconds) << ',' << format_double(r.per_event) << '\n';
}

std::string certificate_line(const Certificate& cert) {
    return "primal=" + format_double(cert.primal) + " dual=" + format_double(cert.dual) +
           " gap=" + format_double(cert.gap) + " valid=" + (cert.valid ? "true" : "false");
}

}  // namespace nm
