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


#ifndef NESTMATCH_IO_H
#define NESTMATCH_IO_H

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nestmatch/analysis.h"
#include "nestmatch/matcher.h"
#include "nestmatch/nest.h"
#include "nestmatch/oracle.h"
#include "nestmatch/parallel.h"

namespace nm {

class FormatError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Shortest text with 17 significant digits that parses back to the same double, in the
/// "C" locale regardless of the process locale.
std::string format_double(double v);
double parse_double(std::string_view text);

/// {"lx", "ly", "rounds", "stick_classes": [{"kind", "p"}], "seed"} plus optional "b_max".
LatticeSpec parse_lattice_config(std::string_view json_text);
LatticeSpec load_lattice_config(const std::string& path);
std::string lattice_config_json(const LatticeSpec& spec);

/// Events CSV: header ball_id,t.
void write_events_csv(std::ostream& out, const std::vector<DetectionEvent>& events);
std::vector<DetectionEvent> read_events_csv(std::istream& in);

/// Matching CSV: header event_a,event_b,weight; event_b is BOUNDARY for boundary matches.
/// Rows are ordered by event_a.
void write_matching_csv(std::ostream& out, const Matching& matching);
Matching read_matching_csv(std::istream& in);

/// {"singleton_y": [...], "blossoms": [{"members": [...], "y": ...}]}
void write_duals_json(std::ostream& out, const DualState& duals);
DualState read_duals_json(std::istream& in);

/// Nest dumps: ball_id,x,y,t and src,dst,p,w with dst = -1 for boundary sticks.
void write_balls_csv(std::ostream& out, const Nest& nest);
void write_sticks_csv(std::ostream& out, const Nest& nest);

void write_metrics_csv(std::ostream& out, const std::vector<RoundMetrics>& metrics);
void write_histogram_csv(std::ostream& out, const ClusterHistogram& hist);
void write_fit_json(std::ostream& out, const ExponentialFit& fit);
void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

/// primal=<w> dual=<w> gap=<g> valid=<bool>
std::string certificate_line(const Certificate& cert);

}  // namespace nm

#endif  // NESTMATCH_IO_H
