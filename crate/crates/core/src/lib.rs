//! Exact analysis of the two-machine favorite-machines scheduling game.
//!
//! Jobs pick one of two machines; a job runs at its size on its favorite
//! machine and `s` times slower on the other. This crate computes pure
//! Nash and strong Nash equilibria exactly on small instances, evaluates
//! the closed-form price-of-anarchy and strong-price-of-anarchy curves
//! as functions of `s`, constructs the worst-case certificate instances
//! that attain those curves, and cross-checks the curves with an exact
//! branch-LP maximizer over the equilibrium condition system.
//!
//! Modules:
//! - [`scalar`]: dual-mode (exact rational / f64) arithmetic,
//! - [`model`]: the game itself (loads, makespan, optimum, decomposition),
//! - [`equilibria`]: NE/SE detection by exhaustive deviation checking,
//! - [`bounds`]: the closed-form bound curves and their breakpoints,
//! - [`certificates`]: worst-case instances and their verification,
//! - [`lp`]: exact simplex over the disjunctive condition system.

pub mod bounds;
pub mod certificates;
pub mod equilibria;
pub mod lp;
pub mod model;
pub mod scalar;

/// Enumeration limits for the exhaustive operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum job count for allocation enumeration (`2^n` allocations).
    pub enumeration: usize,
    /// Maximum job count for coalition search (`2^n` subsets per
    /// allocation on top of the allocation enumeration).
    pub coalitions: usize,
}

pub const DEFAULT_ENUMERATION_CAP: usize = 20;
pub const DEFAULT_COALITION_CAP: usize = 14;

impl Default for Caps {
    fn default() -> Self {
        Caps {
            enumeration: DEFAULT_ENUMERATION_CAP,
            coalitions: DEFAULT_COALITION_CAP,
        }
    }
}

impl Caps {
    /// Same limit for both enumeration and coalition search.
    pub fn uniform(cap: usize) -> Caps {
        Caps {
            enumeration: cap,
            coalitions: cap,
        }
    }
}
