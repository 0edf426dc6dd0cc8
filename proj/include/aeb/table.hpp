// Copyright 2026 The aebrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AEB_TABLE_HPP
#define AEB_TABLE_HPP

#include <ostream>
#include <string>
#include <vector>

#include "aeb/config.hpp"
#include "aeb/eval.hpp"
#include "aeb/trainer.hpp"

// Comma-separated tables with a header row. Doubles are written in their
// shortest round-trip form so that equal results give identical bytes.

namespace aeb {

inline std::string num(double v) { return detail::format_double(v); }

inline void write_episode_logs(std::ostream& os, const std::vector<EpisodeLog>& logs,
                               std::size_t smooth_window = 200) {
  const auto smooth = moving_average(returns_of(logs), smooth_window);
  os << "episode,outcome,return,smoothed_return,discounted_return,steps,v_init,ttc,scenario,side,"
        "final_gap,epsilon,mean_loss\n";
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const auto& l = logs[i];
    os << l.index << ',' << (l.outcome ? event_name(*l.outcome) : "truncated") << ','
       << num(l.ret) << ',' << num(smooth[i]) << ',' << num(l.discounted_ret) << ',' << l.steps
       << ',' << num(l.v_init) << ',' << num(l.ttc) << ',' << scenario_name(l.scenario) << ','
       << side_name(l.side) << ',' << num(l.final_gap) << ',' << num(l.epsilon) << ','
       << num(l.mean_loss) << '\n';
  }
}

inline void write_sweep(std::ostream& os, const std::vector<SweepResult>& rows) {
  os << "ttc,trials,collisions,collision_rate_pct,stops,passes,crosses,truncated,"
        "infeasible_fraction_pct\n";
  for (const auto& r : rows)
    os << num(r.ttc) << ',' << r.trials << ',' << r.collisions << ',' << num(100.0 * r.rate)
       << ',' << r.stops << ',' << r.passes << ',' << r.crosses << ',' << r.truncated << ','
       << num(100.0 * r.infeasible_fraction) << '\n';
}

inline void write_ncap(std::ostream& os, const std::vector<NcapCase>& rows) {
  os << "test,v_test_kmh,outcome,collided,v_impact,points_available,points_awarded\n";
  for (const auto& c : rows)
    os << ncap_name(c.test) << ',' << num(c.v_test_kmh) << ','
       << (c.outcome ? event_name(*c.outcome) : "truncated") << ',' << (c.collided ? 1 : 0)
       << ',' << num(c.v_impact) << ',' << num(c.points_available) << ','
       << num(c.points_awarded) << '\n';
}

inline void write_trace(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "t,veh_x,ped_x,ped_y,v,action,reward\n";
  for (const auto& r : rows)
    os << num(r.t) << ',' << num(r.veh_x) << ',' << num(r.ped_x) << ',' << num(r.ped_y) << ','
       << num(r.v) << ',' << (r.action ? action_name(*r.action) : "") << ',' << num(r.reward)
       << '\n';
}

inline void write_gap_stats(std::ostream& os, const GapStats& s) {
  os << "metric,value\n"
     << "episodes," << s.episodes << '\n'
     << "stops," << s.stops << '\n'
     << "stops_mid_cross," << s.stops_mid_cross << '\n'
     << "min_gap," << num(s.min) << '\n'
     << "median_gap," << num(s.median) << '\n'
     << "max_gap," << num(s.max) << '\n';
  for (std::size_t i = 0; i < s.histogram.size(); ++i)
    os << "hist_" << i << '_' << i + 1 << "m," << s.histogram[i] << '\n';
}

}  // namespace aeb

#endif  // AEB_TABLE_HPP
