"""Direct and environmental contact, end to end.

A confirmed case spends 15 minutes at a venue. Their processed profile
(30-minute lifespan) is matched against three users:

  * one sitting 1.5 m away at the same time (direct contact),
  * one arriving 10 minutes after the case left (environmental contact:
    the virus is still live),
  * one arriving 40 minutes after departure (lifespan expired).

Detection flags every scan whose similarity clears the threshold inside a
segment's validity window; flags become episodes under the 5-of-10-minutes
sliding-window rule.
"""

from wifitrace import (
    DetectionConfig,
    LifespanSchedule,
    build_case_profile,
    match_and_notify,
    serialize_report,
)
from wifitrace.simulator import make_site, simulate_profile, stationary

env, layout = make_site("office", seed=7)
venue = layout.center
nearby = (venue[0] + 1.5, venue[1])
cfg = DetectionConfig(alpha=0.2)  # 1-min scans, 10-min window, 5-min exposure

case_walk = simulate_profile(env, stationary(venue, 0, 900), 60, stream=0,
                             device_tag="case")
published = [build_case_profile(case_walk, LifespanSchedule(default=1800),
                                case_label="case-001")]
last_window_end = max(s.t_end for s in published[0].segments)
print(f"case present [0, 900]; published windows reach t={last_window_end}")

visitors = {
    "direct (co-located 0..900)": stationary(nearby, 0, 900),
    "enters 10 min after departure": stationary(venue, 1500, 2100),
    "enters 40 min after departure": stationary(venue, 3300, 3900),
}

for stream, (name, trajectory) in enumerate(visitors.items(), start=10):
    user = simulate_profile(env, trajectory, 60, stream=stream)
    report = match_and_notify(user, published, cfg)
    summary = report.summary()
    print(f"\n{name}:")
    print(f"  contact flags: {summary['contacts']}/{summary['flags']}, "
          f"episodes: {summary['episodes']}, "
          f"exposure: {summary['exposure_minutes']:.0f} min")
    for episode in report.episodes:
        print(f"  episode [{episode.start} .. {episode.end}] "
              f"case={episode.case_label} "
              f"({episode.contact_minutes:.0f} contact-minutes)")

print("\nfull report of the environmental visitor:")
user = simulate_profile(env, visitors["enters 10 min after departure"], 60,
                        stream=11)
print(serialize_report(match_and_notify(user, published, cfg)).decode())
