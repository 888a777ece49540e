//! Legality of starting configurations.
//!
//! A configuration is legal when it could be the visited set of a walk:
//! finite, downward-closed and connected. Two connectivity conventions are
//! supported. Under [`Connectivity::FloorAdjoined`] the floor plane is part of
//! the graph, so every column touching it is connected to every other one;
//! this is the convention walk-generated sets satisfy, since the walker moves
//! between columns along the floor. [`Connectivity::Strict`] asks for
//! nearest-neighbor connectivity of the set itself.

use std::collections::{BTreeSet, VecDeque};

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::site::Site;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    FloorAdjoined,
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    FloorOrBelow,
    NotDownwardClosed,
    Disconnected,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Violation::FloorOrBelow => "site is not above the floor",
            Violation::NotDownwardClosed => "site below is missing (not downward-closed)",
            Violation::Disconnected => "site is not connected to the rest",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Legal,
    Illegal { reason: Violation, site: Site },
}

impl Verdict {
    pub fn is_legal(&self) -> bool {
        matches!(self, Verdict::Legal)
    }
}

/// Check a configuration. The reported site is the smallest violating one
/// in `(x, y, z)` order.
pub fn is_legal_configuration<'a, I>(config: I, connectivity: Connectivity) -> Verdict
where
    I: IntoIterator<Item = &'a Site>,
{
    let sorted: BTreeSet<Site> = config.into_iter().copied().collect();
    if let Some(&site) = sorted.iter().find(|s| s.z <= 0) {
        return Verdict::Illegal {
            reason: Violation::FloorOrBelow,
            site,
        };
    }
    if let Some(site) = first_not_downward_closed(&sorted) {
        return Verdict::Illegal {
            reason: Violation::NotDownwardClosed,
            site,
        };
    }
    if connectivity == Connectivity::Strict {
        if let Some(site) = first_disconnected(&sorted) {
            return Verdict::Illegal {
                reason: Violation::Disconnected,
                site,
            };
        }
    }
    Verdict::Legal
}

fn first_not_downward_closed(sorted: &BTreeSet<Site>) -> Option<Site> {
    sorted
        .iter()
        .copied()
        .find(|s| s.z > 1 && !sorted.contains(&s.below()))
}

/// Downward closure alone, for callers that already know the set is above the floor.
pub fn is_downward_closed<'a, I>(config: I) -> bool
where
    I: IntoIterator<Item = &'a Site>,
{
    let sorted: BTreeSet<Site> = config.into_iter().copied().collect();
    first_not_downward_closed(&sorted).is_none()
}

fn first_disconnected(sorted: &BTreeSet<Site>) -> Option<Site> {
    let first = *sorted.iter().next()?;
    let members: FxHashSet<Site> = sorted.iter().copied().collect();
    let mut seen = FxHashSet::default();
    let mut queue = VecDeque::from([first]);
    seen.insert(first);
    while let Some(s) = queue.pop_front() {
        for n in s.neighbors() {
            if members.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    sorted.iter().copied().find(|s| !seen.contains(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i32, y: i32, z: i32) -> Site {
        Site::new(x, y, z)
    }

    #[test]
    fn empty_is_legal() {
        assert!(is_legal_configuration(&[], Connectivity::FloorAdjoined).is_legal());
        assert!(is_legal_configuration(&[], Connectivity::Strict).is_legal());
    }

    #[test]
    fn floating_site_is_not_downward_closed() {
        assert_eq!(
            is_legal_configuration(&[s(0, 0, 2)], Connectivity::FloorAdjoined),
            Verdict::Illegal {
                reason: Violation::NotDownwardClosed,
                site: s(0, 0, 2)
            }
        );
    }

    #[test]
    fn separated_columns_depend_on_convention() {
        let cfg = [s(0, 0, 1), s(0, 0, 2), s(5, 5, 1)];
        assert!(is_legal_configuration(&cfg, Connectivity::FloorAdjoined).is_legal());
        assert_eq!(
            is_legal_configuration(&cfg, Connectivity::Strict),
            Verdict::Illegal {
                reason: Violation::Disconnected,
                site: s(5, 5, 1)
            }
        );
    }

    #[test]
    fn floor_sites_are_rejected() {
        assert_eq!(
            is_legal_configuration(&[s(0, 0, 1), s(1, 0, 0)], Connectivity::FloorAdjoined),
            Verdict::Illegal {
                reason: Violation::FloorOrBelow,
                site: s(1, 0, 0)
            }
        );
    }

    #[test]
    fn first_violation_is_smallest() {
        let cfg = [s(3, 0, 4), s(-1, 0, 3), s(3, 0, 1)];
        assert_eq!(
            is_legal_configuration(&cfg, Connectivity::FloorAdjoined),
            Verdict::Illegal {
                reason: Violation::NotDownwardClosed,
                site: s(-1, 0, 3)
            }
        );
    }

    #[test]
    fn adjacent_columns_are_strictly_connected() {
        let cfg = [s(0, 0, 1), s(1, 0, 1), s(1, 0, 2), s(1, 1, 1)];
        assert!(is_legal_configuration(&cfg, Connectivity::Strict).is_legal());
    }
}
