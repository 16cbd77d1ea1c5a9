//! Horoball forests in the upper half-plane.
//!
//! The Ford circles together with the horoball `{y >= 1}` form a packing of
//! pairwise tangent-or-disjoint horoballs invariant under `PSL(2, Z)`. In each
//! horoball a copy of `Z` is placed on the horocycle at hyperbolic depth
//! `delta`; consecutive lattice points are one unit of horocyclic length apart.
//! Rays along such a line have `d(x_0, x_n) = 2 asinh(n/2)`, so their speed
//! tends to zero while they converge to the tangency point.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use rand::Rng;
use serde::Serialize;

use crate::error::{Result, UrtError};

/// Tolerance on `ad - bc = 1`.
pub const DET_TOLERANCE: f64 = 1e-12;

/// Proposals [`random_isometry`] may spend.
pub const ISOMETRY_BUDGET: usize = 10_000;

/// Default depth of lattices inside horoballs.
pub const DEFAULT_DELTA: f64 = std::f64::consts::LN_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && y > 0.0) {
            return Err(UrtError::Domain(format!("({x}, {y}) is not in the upper half-plane")));
        }
        Ok(HPoint { x, y })
    }

    pub fn i() -> Self {
        HPoint { x: 0.0, y: 1.0 }
    }

    fn z(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// Image in the unit disc under `z -> (z - i)/(z + i)`.
    pub fn to_disc(self) -> (f64, f64) {
        let w = cayley(self.z());
        (w.re, w.im)
    }
}

fn cayley(z: Complex64) -> Complex64 {
    (z - Complex64::i()) / (z + Complex64::i())
}

/// A point of the boundary `R ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum IdealPoint {
    Real(f64),
    Infinity,
}

impl IdealPoint {
    pub fn to_disc(self) -> (f64, f64) {
        match self {
            IdealPoint::Infinity => (1.0, 0.0),
            IdealPoint::Real(t) => {
                let w = cayley(Complex64::new(t, 0.0));
                (w.re, w.im)
            }
        }
    }
}

pub fn hyperbolic_distance(a: HPoint, b: HPoint) -> f64 {
    let chord = (a.x - b.x).hypot(a.y - b.y);
    2.0 * (chord / (2.0 * (a.y * b.y).sqrt())).asinh()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Horoball {
    /// `{y >= height}`.
    AtInfinity { height: f64 },
    /// Euclidean disc of the given radius tangent to the real line at `p/q`.
    Ford { p: i64, q: i64, radius: f64 },
}

impl Horoball {
    pub fn ford(p: i64, q: i64) -> Result<Self> {
        if q < 1 || p.gcd(&q) != 1 {
            return Err(UrtError::Domain(format!("{p}/{q} is not in lowest terms with q >= 1")));
        }
        Ok(Horoball::Ford { p, q, radius: 0.5 / (q as f64 * q as f64) })
    }

    pub fn tangency(&self) -> IdealPoint {
        match *self {
            Horoball::AtInfinity { .. } => IdealPoint::Infinity,
            Horoball::Ford { p, q, .. } => IdealPoint::Real(p as f64 / q as f64),
        }
    }

    pub fn contains(&self, z: HPoint) -> bool {
        match *self {
            Horoball::AtInfinity { height } => z.y >= height,
            Horoball::Ford { p, q, radius } => {
                let c = p as f64 / q as f64;
                (z.x - c).hypot(z.y - radius) <= radius
            }
        }
    }

    /// The map in `SL(2, Z)` sending the height-1 ball at infinity onto this
    /// Ford ball, or a dilation for a ball at infinity.
    pub fn chart(&self) -> MobiusMap {
        match *self {
            Horoball::AtInfinity { height } => {
                let s = height.sqrt();
                MobiusMap { a: s, b: 0.0, c: 0.0, d: 1.0 / s }
            }
            Horoball::Ford { p, q, .. } => {
                // p d - b q = 1
                let g = p.extended_gcd(&q);
                let (d, b) = (g.x, -g.y);
                MobiusMap { a: p as f64, b: b as f64, c: q as f64, d: d as f64 }
            }
        }
    }
}

/// Exact position of two Ford circles relative to each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Contact {
    Disjoint,
    Tangent,
    Overlapping,
}

/// Compares the squared distance of the centres with the squared sum of the
/// radii in rational arithmetic.
pub fn ford_contact(p1: i64, q1: i64, p2: i64, q2: i64) -> Contact {
    type Q = Ratio<i128>;
    let r1 = Q::new(1, 2 * i128::from(q1) * i128::from(q1));
    let r2 = Q::new(1, 2 * i128::from(q2) * i128::from(q2));
    let dx = Q::new(i128::from(p1), i128::from(q1)) - Q::new(i128::from(p2), i128::from(q2));
    let dy = r1 - r2;
    let centres = dx * dx + dy * dy;
    let touch = (r1 + r2) * (r1 + r2);
    match centres.cmp(&touch) {
        std::cmp::Ordering::Greater => Contact::Disjoint,
        std::cmp::Ordering::Equal => Contact::Tangent,
        std::cmp::Ordering::Less => Contact::Overlapping,
    }
}

/// The ball at infinity (height 1) followed by the Ford circles at `p/q` with
/// `q <= q_max` and `lo <= p/q <= hi`, ordered by `q` then `p`.
pub fn ford_horoballs(q_max: i64, window: (f64, f64)) -> Result<Vec<Horoball>> {
    if q_max < 1 {
        return Err(UrtError::Domain("q_max must be at least 1".into()));
    }
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(UrtError::Domain(format!("bad window [{lo}, {hi}]")));
    }
    let mut out = vec![Horoball::AtInfinity { height: 1.0 }];
    for q in 1..=q_max {
        let (pmin, pmax) = ((lo * q as f64).ceil() as i64, (hi * q as f64).floor() as i64);
        for p in pmin..=pmax {
            if p.gcd(&q) == 1 {
                out.push(Horoball::ford(p, q)?);
            }
        }
    }
    Ok(out)
}

/// `z -> (a z + b)/(c z + d)` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if det.is_nan() || (det - 1.0).abs() > DET_TOLERANCE {
            return Err(UrtError::Domain(format!("determinant {det} differs from 1")));
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        MobiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn apply(&self, z: HPoint) -> HPoint {
        let w = (self.a * z.z() + self.b) / (self.c * z.z() + self.d);
        // the imaginary part is y / |cz + d|^2, which stays accurate near the axis
        let y = z.y / (self.c * z.z() + self.d).norm_sqr();
        HPoint { x: w.re, y }
    }

    pub fn apply_ideal(&self, t: IdealPoint) -> IdealPoint {
        match t {
            IdealPoint::Infinity if self.c == 0.0 => IdealPoint::Infinity,
            IdealPoint::Infinity => IdealPoint::Real(self.a / self.c),
            IdealPoint::Real(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    IdealPoint::Infinity
                } else {
                    IdealPoint::Real((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, o: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

/// Relative floating-point error above which lattice points are rejected.
const LATTICE_REL_ERROR: f64 = 1e-6;

/// Lattice points `k = 0..count` on the horocycle at depth `delta` in `h`.
pub fn horocycle_lattice(h: &Horoball, delta: f64, count: usize) -> Result<Vec<HPoint>> {
    horocycle_lattice_range(h, delta, 0, count as i64)
}

/// Lattice points with indices `start..start + count`.
pub fn horocycle_lattice_range(h: &Horoball, delta: f64, start: i64, count: i64) -> Result<Vec<HPoint>> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(UrtError::Domain(format!("delta = {delta} must be finite and >= 0")));
    }
    if count < 1 {
        return Err(UrtError::Domain("count must be at least 1".into()));
    }
    let t = delta.exp();
    let (m, base) = match *h {
        Horoball::AtInfinity { height } => (MobiusMap::identity(), height * t),
        Horoball::Ford { .. } => (h.chart(), t),
    };
    (start..start + count)
        .map(|k| {
            let z = HPoint { x: base * k as f64, y: base };
            let w = m.apply(z);
            if !(w.y.is_normal() && w.x.is_finite()) || f64::EPSILON * w.x.abs().max(1.0) / w.y > LATTICE_REL_ERROR {
                return Err(UrtError::Precision(format!("lattice point {k} is too close to the boundary")));
            }
            Ok(w)
        })
        .collect()
}

/// A maximal run of kept lattice edges inside one horoball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForestPath {
    pub horoball: usize,
    /// Lattice index of the first point.
    pub start: i64,
    pub points: Vec<HPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Horoforest {
    pub horoballs: Vec<Horoball>,
    pub delta: f64,
    pub paths: Vec<ForestPath>,
}

impl Horoforest {
    /// Smallest distance between lattice points of distinct horoballs.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.paths.iter().enumerate() {
            for b in &self.paths[i + 1..] {
                if a.horoball == b.horoball {
                    continue;
                }
                for &x in &a.points {
                    for &y in &b.points {
                        best = best.min(hyperbolic_distance(x, y));
                    }
                }
            }
        }
        best
    }

    /// Component sizes (vertex counts).
    pub fn component_sizes(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.points.len()).collect()
    }
}

/// In every horoball of `ford_horoballs(q_max, window)`, lattice indices
/// `-half_width..=half_width` joined by edges kept independently with
/// probability `keep`.
pub fn build_horoforest<R: Rng + ?Sized>(
    q_max: i64,
    window: (f64, f64),
    delta: f64,
    keep: f64,
    half_width: i64,
    rng: &mut R,
) -> Result<Horoforest> {
    if !(keep > 0.0 && keep <= 1.0) {
        return Err(UrtError::Domain(format!("keep probability {keep} outside (0, 1]")));
    }
    if half_width < 0 {
        return Err(UrtError::Domain("half_width must be >= 0".into()));
    }
    let horoballs = ford_horoballs(q_max, window)?;
    let mut paths = Vec::new();
    for (i, h) in horoballs.iter().enumerate() {
        let pts = horocycle_lattice_range(h, delta, -half_width, 2 * half_width + 1)?;
        let mut run_start = 0;
        for j in 1..=pts.len() {
            let cut = j == pts.len() || !(keep >= 1.0 || rng.random::<f64>() < keep);
            if cut {
                paths.push(ForestPath {
                    horoball: i,
                    start: run_start as i64 - half_width,
                    points: pts[run_start..j].to_vec(),
                });
                run_start = j;
            }
        }
    }
    Ok(Horoforest { horoballs, delta, paths })
}

/// Area of the hyperbolic box `|x| <= 1/2, y >= sqrt(3)/2`.
const BOX_AREA: f64 = 1.154_700_538_379_251_5; // 2/sqrt(3)

fn propose<R: Rng + ?Sized>(rng: &mut R) -> (HPoint, bool) {
    let x = rng.random::<f64>() - 0.5;
    // density proportional to 1/y^2 on [sqrt(3)/2, inf)
    let u = 1.0 - rng.random::<f64>();
    let y = 0.5 * 3f64.sqrt() / u;
    (HPoint { x, y }, x * x + y * y >= 1.0)
}

/// Monte Carlo hyperbolic area of `{|x| <= 1/2, |z| >= 1}`.
pub fn fundamental_domain_area<R: Rng + ?Sized>(proposals: usize, rng: &mut R) -> f64 {
    let hits = (0..proposals).filter(|_| propose(rng).1).count();
    BOX_AREA * hits as f64 / proposals as f64
}

/// `T_w ∘ R_theta`: a rotation about `i` by a uniform angle followed by the
/// map taking `i` to an area-uniform point `w` of the modular fundamental
/// domain.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R) -> Result<MobiusMap> {
    for _ in 0..ISOMETRY_BUDGET {
        let (w, ok) = propose(rng);
        if !ok {
            continue;
        }
        let half = std::f64::consts::PI * rng.random::<f64>();
        let (s, c) = half.sin_cos();
        let rot = MobiusMap { a: c, b: s, c: -s, d: c };
        let sy = w.y.sqrt();
        let t = MobiusMap { a: sy, b: w.x / sy, c: 0.0, d: 1.0 / sy };
        return Ok(t.compose(&rot));
    }
    Err(UrtError::Retry(format!("no point accepted in {ISOMETRY_BUDGET} proposals")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RayTrace {
    pub points: Vec<HPoint>,
    /// `d(x_0, x_n)`.
    pub distances: Vec<f64>,
    /// `d(x_0, x_n) / n`, with `0` at `n = 0`.
    pub speeds: Vec<f64>,
    pub disc: Vec<(f64, f64)>,
    /// Disc image of the boundary point the ray is expected to converge to.
    pub limit: (f64, f64),
    /// `|z_n - limit|` in the disc.
    pub limit_error: Vec<f64>,
}

pub fn ray_metrics(ray: &[HPoint], n_max: usize, limit: IdealPoint) -> Result<RayTrace> {
    if ray.len() < n_max + 1 {
        return Err(UrtError::Domain(format!("ray has {} points, need {}", ray.len(), n_max + 1)));
    }
    let points = ray[..=n_max].to_vec();
    let x0 = points[0];
    let distances: Vec<f64> = points.iter().map(|&p| hyperbolic_distance(x0, p)).collect();
    let speeds = distances.iter().enumerate().map(|(n, d)| if n == 0 { 0.0 } else { d / n as f64 }).collect();
    let disc: Vec<(f64, f64)> = points.iter().map(|p| p.to_disc()).collect();
    let lim = limit.to_disc();
    let limit_error = disc.iter().map(|&(a, b)| (a - lim.0).hypot(b - lim.1)).collect();
    Ok(RayTrace { points, distances, speeds, disc, limit: lim, limit_error })
}

impl RayTrace {
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::from("n,distance,speed,disc_x,disc_y\n");
        for n in 0..self.points.len() {
            let _ = writeln!(
                s,
                "{n},{:?},{:?},{:?},{:?}",
                self.distances[n], self.speeds[n], self.disc[n].0, self.disc[n].1
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn pt(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    // integral of dy/y along a vertical geodesic
    fn vertical_length(y0: f64, y1: f64) -> f64 {
        let n = 100_000;
        let h = (y1 - y0) / n as f64;
        (0..n).map(|i| h / (y0 + (i as f64 + 0.5) * h)).sum()
    }

    // the geodesic through (0,1) and (s,1) is the semicircle of radius r
    // centred at s/2; along it ds = r dt / (r sin t)
    fn arc_length(s: f64) -> f64 {
        let r = (s * s / 4.0 + 1.0).sqrt();
        let t0 = (1.0 / r).asin();
        let n = 200_000;
        let h = (std::f64::consts::PI - 2.0 * t0) / n as f64;
        (0..n).map(|i| h / (t0 + (i as f64 + 0.5) * h).sin()).sum()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hyperbolic_distance(HPoint::i(), HPoint::i()), 0.0);
        assert!((hyperbolic_distance(pt(0.0, 1.0), pt(0.0, 2.0)) - 2f64.ln()).abs() < 1e-15);
        assert!((vertical_length(1.0, 2.0) - 2f64.ln()).abs() < 1e-9);
        for s in [1.0, 2.0, 10.0] {
            let d = hyperbolic_distance(pt(0.0, 1.0), pt(s, 1.0));
            assert!((d - 2.0 * (s / 2.0).asinh()).abs() < 1e-12);
            assert!((d - arc_length(s)).abs() < 1e-6, "{s}: {d} vs {}", arc_length(s));
        }
        assert!(HPoint::new(0.0, 0.0).is_err());
    }

    #[test]
    fn ford_examples() {
        let balls = ford_horoballs(1, (0.0, 1.0)).unwrap();
        assert_eq!(balls.len(), 3);
        assert_eq!(balls[1], Horoball::Ford { p: 0, q: 1, radius: 0.5 });
        assert_eq!(balls[2], Horoball::Ford { p: 1, q: 1, radius: 0.5 });
        assert_eq!(Horoball::ford(1, 2).unwrap(), Horoball::Ford { p: 1, q: 2, radius: 0.125 });
        assert!(Horoball::ford(2, 4).is_err());
        assert_eq!(ford_contact(0, 1, 1, 1), Contact::Tangent);
        assert_eq!(ford_contact(0, 1, 1, 3), Contact::Tangent);
        assert_eq!(ford_contact(0, 1, 2, 3), Contact::Disjoint);
    }

    #[test]
    fn chart_maps_infinity_ball_to_ford_ball() {
        for h in ford_horoballs(6, (-1.0, 2.0)).unwrap() {
            let m = h.chart();
            assert!(MobiusMap::new(m.a, m.b, m.c, m.d).is_ok());
            assert_eq!(m.apply_ideal(IdealPoint::Infinity), h.tangency());
            for k in -5..=5 {
                let z = m.apply(pt(k as f64 * 0.7, 1.0));
                if let Horoball::Ford { p, q, radius } = h {
                    let c = p as f64 / q as f64;
                    assert!(((z.x - c).hypot(z.y - radius) - radius).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let inf = Horoball::AtInfinity { height: 1.0 };
        let l = horocycle_lattice(&inf, 0.0, 4).unwrap();
        assert_eq!(l, (0..4).map(|k| pt(k as f64, 1.0)).collect::<Vec<_>>());
        let l = horocycle_lattice(&inf, 2f64.ln(), 4).unwrap();
        for (k, p) in l.iter().enumerate() {
            assert!((p.x - 2.0 * k as f64).abs() < 1e-15 && (p.y - 2.0).abs() < 1e-15);
        }
        let chord = 2.0 * 0.5f64.asinh();
        assert!((hyperbolic_distance(l[0], l[1]) - chord).abs() < 1e-12);
        assert!((chord - 0.9624).abs() < 1e-4);
        // Ford lattices keep the chord identity
        let h = Horoball::ford(2, 5).unwrap();
        let l = horocycle_lattice(&h, 0.3, 40).unwrap();
        for j in 0..40 {
            assert!(h.contains(l[j]));
            assert!((hyperbolic_distance(l[0], l[j]) - 2.0 * (j as f64 / 2.0).asinh()).abs() < 1e-7);
        }
        let far = horocycle_lattice_range(&h, 0.0, 1_000_000_000, 2);
        assert!(matches!(far, Err(UrtError::Precision(_))));
    }

    #[test]
    fn forests() {
        let mut rng = SeedStream::new(1, "forest").rng(0);
        let f = build_horoforest(3, (0.0, 1.0), 1.0, 1.0, 5, &mut rng).unwrap();
        assert_eq!(f.paths.len(), f.horoballs.len());
        assert!(f.component_sizes().iter().all(|&s| s == 11));
        assert!(f.min_separation() >= 2.0 - 1e-9);
        let f = build_horoforest(1, (0.0, 0.0), 0.0, 0.5, 20_000, &mut rng).unwrap();
        let sizes = f.component_sizes();
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
        // edge percolation on a path: mean cluster size 1/(1 - keep)
        assert!((mean - 2.0).abs() < 0.1, "{mean}");
        assert!(build_horoforest(1, (0.0, 1.0), 0.0, 0.0, 3, &mut rng).is_err());
    }

    #[test]
    fn isometries() {
        let mut rng = SeedStream::new(2, "iso").rng(0);
        let area = fundamental_domain_area(1_000_000, &mut rng);
        assert!((area / (std::f64::consts::PI / 3.0) - 1.0).abs() < 0.02, "{area}");
        let pts = [pt(0.0, 1.0), pt(0.3, 2.0), pt(-1.5, 0.2), pt(4.0, 7.0)];
        for _ in 0..50 {
            let m = random_isometry(&mut rng).unwrap();
            assert!((m.a * m.d - m.b * m.c - 1.0).abs() < DET_TOLERANCE);
            for &a in &pts {
                for &b in &pts {
                    let (ma, mb) = (m.apply(a), m.apply(b));
                    assert!((hyperbolic_distance(a, b) - hyperbolic_distance(ma, mb)).abs() < 1e-9);
                }
            }
            // tangent Ford circles stay tangent: the images of their
            // tangency points are the tangency points of the images
            let h = Horoball::ford(1, 2).unwrap();
            let g = m.compose(&h.chart());
            assert_eq!(g.apply_ideal(IdealPoint::Infinity), m.apply_ideal(h.tangency()));
        }
    }

    #[test]
    fn ray_examples() {
        let inf = Horoball::AtInfinity { height: 1.0 };
        let ray = horocycle_lattice(&inf, 0.0, 10_001).unwrap();
        let t = ray_metrics(&ray, 10_000, inf.tangency()).unwrap();
        for n in [1, 10, 100, 10_000] {
            assert!((t.distances[n] - 2.0 * (n as f64 / 2.0).asinh()).abs() < 1e-9);
        }
        assert!((t.speeds[10_000] - 0.00184).abs() < 1e-5);
        assert!(t.distances.windows(2).all(|w| w[0] <= w[1]));
        let ray = horocycle_lattice(&inf, DEFAULT_DELTA, 2001).unwrap();
        let t = ray_metrics(&ray, 2000, inf.tangency()).unwrap();
        assert!(t.limit_error[1000..].iter().all(|&e| e < 1e-3));
        assert!(ray_metrics(&ray, 5000, inf.tangency()).is_err());
    }
}
