//! The local (Benjamini-Schramm) distance between rooted networks.
//!
//! `d = 1/(1 + alpha)` where `alpha` is the supremum of `r > 0` such that the
//! radius-`floor(r)` balls admit a rooted isomorphism with all corresponding
//! marks within `1/r` (max metric over coordinates). From finite data the
//! supremum is only known once a disagreement is found within the horizon.

use serde::Serialize;

use crate::error::Result;
use crate::iso::rooted_isomorphic;
use crate::network::{ball, RootedNetwork};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    /// A disagreement was found at some `r <= r_max`; the distance is exact.
    Exact,
    /// No disagreement up to `r_max`; the true distance is at most the value.
    UpperBounded,
}

const BISECTION_STEPS: usize = 60;

pub fn local_distance(a: &RootedNetwork, b: &RootedNetwork, r_max: u32) -> Result<(f64, Exactness)> {
    a.validity().check(u64::from(r_max))?;
    b.validity().check(u64::from(r_max))?;

    let holds = |k: u32, r: f64| -> Result<bool> {
        let (ba, bb) = (ball(a, a.root(), k)?, ball(b, b.root(), k)?);
        Ok(rooted_isomorphic(&ba, &bb, 1.0 / r))
    };

    // The admissible set of r is an initial interval: smaller r means smaller
    // balls and a looser tolerance.
    for k in 0..=r_max {
        let lo = f64::from(k);
        let hi = f64::from((k + 1).min(r_max));
        let lo_ok = if k == 0 { holds(0, f64::MIN_POSITIVE)? } else { holds(k, lo)? };
        if !lo_ok {
            return Ok((1.0 / (1.0 + lo), Exactness::Exact));
        }
        if k == r_max {
            break;
        }
        if holds(k, hi)? {
            continue;
        }
        let (mut good, mut bad) = (lo, hi);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (good + bad);
            if mid <= good || mid >= bad {
                break;
            }
            if holds(k, mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        return Ok((1.0 / (1.0 + bad), Exactness::Exact));
    }
    Ok((1.0 / (1.0 + f64::from(r_max)), Exactness::UpperBounded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Mark, NetworkBuilder, Validity};

    fn path(n: usize, root: usize) -> RootedNetwork {
        let mut b = NetworkBuilder::new();
        b.add_vertices(n);
        for i in 1..n {
            b.add_edge(i - 1, i).unwrap();
        }
        b.build(root, Validity::Unbounded).unwrap()
    }

    #[test]
    fn identical_networks_are_upper_bounded() {
        let g = path(20, 10);
        assert_eq!(local_distance(&g, &g, 5).unwrap(), (1.0 / 6.0, Exactness::UpperBounded));
    }

    #[test]
    fn different_root_degrees() {
        let (a, b) = (path(20, 10), path(20, 0));
        assert_eq!(local_distance(&a, &b, 5).unwrap(), (0.5, Exactness::Exact));
    }

    #[test]
    fn agreement_up_to_radius_two() {
        // root in the middle of a path of 7 vs 5 vertices: balls agree to radius 2
        let (a, b) = (path(7, 3), path(5, 2));
        assert_eq!(local_distance(&a, &b, 5).unwrap(), (0.25, Exactness::Exact));
        assert_eq!(local_distance(&b, &a, 5).unwrap(), (0.25, Exactness::Exact));
    }

    #[test]
    fn marked_roots_give_fractional_alpha() {
        // root marks differ by 0.25: admissible iff 1/r >= 0.25, i.e. r <= 4,
        // and the unmarked structure agrees at every radius
        let mk = |x: f64| {
            let mut b = NetworkBuilder::new();
            b.add_vertex(Mark::new(0, &[x]).unwrap());
            b.build(0, Validity::Unbounded).unwrap()
        };
        let (d, ex) = local_distance(&mk(0.0), &mk(0.25), 10).unwrap();
        assert_eq!(ex, Exactness::Exact);
        assert!((d - 1.0 / 5.0).abs() < 1e-9, "{d}");
        let (d, _) = local_distance(&mk(0.0), &mk(0.3), 10).unwrap();
        assert!((d - 1.0 / (1.0 + 1.0 / 0.3)).abs() < 1e-9, "{d}");
    }

    #[test]
    fn tag_mismatch_at_root() {
        let mut b = NetworkBuilder::new();
        b.add_vertex(Mark::new(3, &[]).unwrap());
        let a = b.build(0, Validity::Unbounded).unwrap();
        let (d, ex) = local_distance(&a, &path(1, 0), 4).unwrap();
        assert_eq!((d, ex), (1.0, Exactness::Exact));
    }

    #[test]
    fn validity_is_checked() {
        let g = path(3, 1).with_validity(Validity::Finite(1));
        assert!(local_distance(&g, &g, 2).is_err());
    }
}
