//! Central-demon executions.
//!
//! The demon picks one privileged node per step. Four deterministic policies
//! make runs reproducible:
//!
//! - round-robin: the lowest privileged index at or after the node following
//!   the last choice, cyclically;
//! - random: uniform over the privileged set, driven by a seeded ChaCha8 stream;
//! - adversarial: the privileged node whose successor has the largest
//!   worst-case distance to the legitimate set (unbounded beats any finite
//!   distance), lowest index on ties;
//! - fixed: the next schedule entry; an entry naming a non-privileged node is
//!   recorded as a skipped step and the configuration is left unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::check::ConvergenceAnalysis;
use super::{NodeId, RingConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DemonPolicy {
    RoundRobin,
    Random { seed: u64 },
    Adversarial,
    Fixed { schedule: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub before: RingConfig,
    pub privileged: Vec<NodeId>,
    pub chosen: NodeId,
    pub after: RingConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    Move(TraceStep),
    /// A fixed-schedule entry whose node was not privileged.
    Skip {
        config: RingConfig,
        privileged: Vec<NodeId>,
        node: NodeId,
    },
    /// An injected transient fault; does not count as a demon step.
    Fault {
        before: RingConfig,
        node: NodeId,
        after: RingConfig,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStatus {
    Completed,
    ScheduleExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub start: RingConfig,
    pub events: Vec<TraceEvent>,
    pub status: TraceStatus,
}

impl Trace {
    pub fn moves(&self) -> impl Iterator<Item = &TraceStep> {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::Move(step) => Some(step),
            _ => None,
        })
    }

    /// Configuration after the last event.
    pub fn final_config(&self) -> RingConfig {
        self.events.last().map_or(self.start, |e| match e {
            TraceEvent::Move(step) => step.after,
            TraceEvent::Skip { config, .. } => *config,
            TraceEvent::Fault { after, .. } => *after,
        })
    }

    /// Configuration after every event, starting with `start`.
    pub fn configs(&self) -> Vec<RingConfig> {
        std::iter::once(self.start)
            .chain(self.events.iter().map(|e| match e {
                TraceEvent::Move(step) => step.after,
                TraceEvent::Skip { config, .. } => *config,
                TraceEvent::Fault { after, .. } => *after,
            }))
            .collect()
    }
}

enum Choice {
    Move(NodeId),
    Skip(NodeId),
    Exhausted,
}

enum Demon {
    RoundRobin { next: NodeId },
    Random(Box<ChaCha8Rng>),
    Adversarial(ConvergenceAnalysis),
    Fixed { schedule: Vec<NodeId>, cursor: usize },
}

impl Demon {
    fn new(policy: &DemonPolicy, n: usize) -> Result<Self> {
        Ok(match policy {
            DemonPolicy::RoundRobin => Demon::RoundRobin { next: 0 },
            DemonPolicy::Random { seed } => Demon::Random(Box::new(ChaCha8Rng::seed_from_u64(*seed))),
            DemonPolicy::Adversarial => Demon::Adversarial(ConvergenceAnalysis::new(n)?),
            DemonPolicy::Fixed { schedule } => {
                if schedule.is_empty() {
                    return Err(Error::InvalidArgument(
                        "fixed demon schedule must be nonempty".into(),
                    ));
                }
                if let Some(&bad) = schedule.iter().find(|&&i| i >= n) {
                    return Err(Error::index("ring", bad, n));
                }
                Demon::Fixed {
                    schedule: schedule.clone(),
                    cursor: 0,
                }
            }
        })
    }

    fn choose(&mut self, cfg: &RingConfig, privileged: &[NodeId]) -> Choice {
        match self {
            Demon::RoundRobin { next } => {
                let n = cfg.n();
                let pick = (0..n)
                    .map(|k| (*next + k) % n)
                    .find(|i| privileged.contains(i))
                    .expect("privileged set is never empty");
                *next = (pick + 1) % n;
                Choice::Move(pick)
            }
            Demon::Random(rng) => Choice::Move(privileged[rng.gen_range(0..privileged.len())]),
            Demon::Adversarial(analysis) => {
                let score = |i: NodeId| {
                    let after = cfg.flipped(i);
                    if after.is_legitimate() {
                        0u64
                    } else {
                        analysis.distance(&after).map_or(u64::MAX, u64::from)
                    }
                };
                let mut best = privileged[0];
                let mut best_score = score(best);
                for &i in &privileged[1..] {
                    let s = score(i);
                    if s > best_score {
                        best = i;
                        best_score = s;
                    }
                }
                Choice::Move(best)
            }
            Demon::Fixed { schedule, cursor } => match schedule.get(*cursor) {
                None => Choice::Exhausted,
                Some(&i) => {
                    *cursor += 1;
                    if privileged.contains(&i) {
                        Choice::Move(i)
                    } else {
                        Choice::Skip(i)
                    }
                }
            },
        }
    }
}

pub fn run_demon(start: RingConfig, policy: &DemonPolicy, max_steps: usize) -> Result<Trace> {
    run_demon_with_faults(start, policy, max_steps, &[])
}

/// Like [`run_demon`], flipping `x_node` before step `step` for every
/// `(step, node)` in `faults`. `step == max_steps` injects after the last step.
pub fn run_demon_with_faults(
    start: RingConfig,
    policy: &DemonPolicy,
    max_steps: usize,
    faults: &[(usize, NodeId)],
) -> Result<Trace> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    for &(step, node) in faults {
        if step > max_steps {
            return Err(Error::index("trace steps", step, max_steps + 1));
        }
        if node >= start.n() {
            return Err(Error::index("ring", node, start.n()));
        }
    }
    let mut demon = Demon::new(policy, start.n())?;
    let mut events = Vec::new();
    let mut cur = start;
    let inject = |step: usize, cur: &mut RingConfig, events: &mut Vec<TraceEvent>| {
        for &(_, node) in faults.iter().filter(|(s, _)| *s == step) {
            let after = cur.flipped(node);
            events.push(TraceEvent::Fault {
                before: *cur,
                node,
                after,
            });
            *cur = after;
        }
    };

    for step in 0..max_steps {
        inject(step, &mut cur, &mut events);
        let privileged = cur.privileged_set();
        match demon.choose(&cur, &privileged) {
            Choice::Move(chosen) => {
                let after = cur.flipped(chosen);
                events.push(TraceEvent::Move(TraceStep {
                    before: cur,
                    privileged,
                    chosen,
                    after,
                }));
                cur = after;
            }
            Choice::Skip(node) => events.push(TraceEvent::Skip {
                config: cur,
                privileged,
                node,
            }),
            Choice::Exhausted => {
                return Ok(Trace {
                    start,
                    events,
                    status: TraceStatus::ScheduleExhausted,
                })
            }
        }
    }
    inject(max_steps, &mut cur, &mut events);
    Ok(Trace {
        start,
        events,
        status: TraceStatus::Completed,
    })
}
