//! Point configurations on the smooth locus of a cuspidal cubic and the
//! Weyl group acting on them through the Picard lattice of the blow-up.
//!
//! The smooth locus is identified with the additive group, with the
//! inflection point at 0 and scale fixed to 1; every statement here is
//! covariant under rescaling all `u_i` together. Everything is exact.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynkin::{cartan_matrix, CartanMatrix, ParamVector, StarGraph};
use crate::error::{Error, Result};
use crate::exact::Mat;
use crate::scalar::{format_q, parse_q, q, Q};

/// Element of the Picard lattice, coefficients on `E_0..E_r`. Rational
/// coefficients are allowed so that the `E_i - E_0/3` basis fits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PicElem(pub Vec<Q>);

impl PicElem {
    pub fn from_ints(v: &[i64]) -> Self {
        PicElem(v.iter().map(|&x| Q::from_integer(x.into())).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        PicElem(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        PicElem(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Q) -> Self {
        PicElem(self.0.iter().map(|a| a * c).collect())
    }
}

impl fmt::Display for PicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let mag = c.abs();
            let coef = if mag.is_one() { String::new() } else { format_q(&mag) };
            write!(f, "{sign}{coef}E{i}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `Z^{1,r}` with form `diag(1, -1, ..., -1)`, for `r` blown-up points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PicardLattice {
    r: usize,
}

impl PicardLattice {
    pub fn new(r: usize) -> Result<Self> {
        if !(6..=9).contains(&r) {
            return Err(Error::Input(format!("number of points must be 6..=9, got {r}")));
        }
        Ok(Self { r })
    }

    pub fn points(&self) -> usize {
        self.r
    }

    pub fn zero(&self) -> PicElem {
        PicElem(vec![Q::zero(); self.r + 1])
    }

    pub fn e(&self, i: usize) -> PicElem {
        let mut v = self.zero();
        v.0[i] = Q::one();
        v
    }

    pub fn dot(&self, a: &PicElem, b: &PicElem) -> Q {
        let mut s = &a.0[0] * &b.0[0];
        for i in 1..=self.r {
            s -= &a.0[i] * &b.0[i];
        }
        s
    }

    /// Anticanonical class `3E_0 - sum E_i`.
    pub fn delta(&self) -> PicElem {
        let mut v = vec![-1i64; self.r + 1];
        v[0] = 3;
        PicElem::from_ints(&v)
    }

    /// Simple roots: `alpha_0 = E_0 - E_1 - E_2 - E_3`, `alpha_i = E_i - E_{i+1}`.
    pub fn alpha(&self, k: usize) -> PicElem {
        assert!(k < self.r, "simple root index out of range");
        let mut v = vec![0i64; self.r + 1];
        if k == 0 {
            v[..4].copy_from_slice(&[1, -1, -1, -1]);
        } else {
            v[k] = 1;
            v[k + 1] = -1;
        }
        PicElem::from_ints(&v)
    }

    pub fn simple_roots(&self) -> Vec<PicElem> {
        (0..self.r).map(|k| self.alpha(k)).collect()
    }

    /// `beta_i = E_i - E_0/3`, `i` in `1..=r`.
    pub fn beta(&self, i: usize) -> PicElem {
        assert!((1..=self.r).contains(&i), "beta index out of range");
        let mut v = self.e(i);
        v.0[0] = q(-1, 3);
        v
    }

    pub fn is_orthogonal_to_delta(&self, f: &PicElem) -> bool {
        self.dot(f, &self.delta()).is_zero()
    }

    /// Coefficients of `f` in the `beta` basis; `f` must be orthogonal to `delta`.
    pub fn beta_coords(&self, f: &PicElem) -> Result<Vec<Q>> {
        self.check_len(f)?;
        if !self.is_orthogonal_to_delta(f) {
            return Err(Error::Input(format!("{f} is not orthogonal to the anticanonical class")));
        }
        Ok(f.0[1..].to_vec())
    }

    fn check_len(&self, f: &PicElem) -> Result<()> {
        if f.0.len() != self.r + 1 {
            return Err(Error::Shape(format!("lattice element has {} entries, expected {}", f.0.len(), self.r + 1)));
        }
        Ok(())
    }

    /// Star graph of the simple roots: center `alpha_3`, legs `(alpha_0)`,
    /// `(alpha_2, alpha_1)` and `(alpha_4, ..., alpha_{r-1})`.
    pub fn star_graph(&self) -> StarGraph {
        StarGraph::new(vec![1, 2, self.r - 4]).expect("valid legs")
    }

    /// Graph node carrying the simple root `alpha_k`.
    pub fn node_of(&self, k: usize) -> usize {
        match k {
            3 => 0,
            0 => 1,
            2 => 2,
            1 => 3,
            _ => k,
        }
    }

    /// Inverse of [`Self::node_of`].
    pub fn root_of_node(&self, node: usize) -> usize {
        (0..self.r).find(|&k| self.node_of(k) == node).expect("node in range")
    }
}

/// `s_alpha(F) = F + (F.alpha) alpha`, for a root of square `-2`.
pub fn reflect_pic(lat: &PicardLattice, f: &PicElem, alpha: &PicElem) -> PicElem {
    f.add(&alpha.scale(&lat.dot(f, alpha)))
}

/// Group-law coordinates `u_1..u_r` of the blown-up points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointConfig {
    pub u: Vec<Q>,
}

impl PointConfig {
    pub fn new(u: Vec<Q>) -> Result<Self> {
        PicardLattice::new(u.len())?;
        Ok(Self { u })
    }

    pub fn from_ratios(u: &[(i64, i64)]) -> Result<Self> {
        Self::new(u.iter().map(|&(n, d)| q(n, d)).collect())
    }

    /// Random generic configuration (no wall conditions) of rationals with
    /// small denominators; for nine points the sum is normalized to 1.
    pub fn random<R: Rng>(r: usize, rng: &mut R) -> Result<Self> {
        PicardLattice::new(r)?;
        loop {
            let mut u: Vec<Q> = (0..r)
                .map(|_| q(rng.random_range(-200..=200), rng.random_range(1..=12)))
                .collect();
            if r == 9 {
                let rest: Q = u[..8].iter().sum();
                u[8] = Q::one() - rest;
            }
            let p = Self { u };
            if wall_check(&p).is_empty() {
                return Ok(p);
            }
        }
    }

    pub fn points(&self) -> usize {
        self.u.len()
    }

    pub fn lattice(&self) -> PicardLattice {
        PicardLattice { r: self.u.len() }
    }

    pub fn sum(&self) -> Q {
        self.u.iter().sum()
    }
}

impl Serialize for PointConfig {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.u.iter().map(format_q).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        let u = v
            .iter()
            .map(|s| parse_q(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        PointConfig::new(u).map_err(serde::de::Error::custom)
    }
}

/// `chi_p(L)`, linear on `delta`-orthogonal classes with
/// `chi_p(E_i - E_0/3) = u_i`.
pub fn chi(p: &PointConfig, l: &PicElem) -> Result<Q> {
    let c = p.lattice().beta_coords(l)?;
    Ok(c.iter().zip(&p.u).map(|(a, b)| a * b).sum())
}

/// Configuration `p'` with `chi_{p'} = chi_p o s_alpha` for any root
/// `alpha` orthogonal to `delta`.
pub fn reflect_config(p: &PointConfig, alpha: &PicElem) -> Result<PointConfig> {
    let lat = p.lattice();
    lat.check_len(alpha)?;
    if lat.dot(alpha, alpha) != Q::from_integer((-2).into()) {
        return Err(Error::Input(format!("{alpha} is not a root")));
    }
    let value = chi(p, alpha)?;
    let u = (1..=lat.points())
        .map(|i| &p.u[i - 1] + lat.dot(&lat.beta(i), alpha) * &value)
        .collect();
    Ok(PointConfig { u })
}

/// Reflection in `E_0 - E_1 - E_2 - E_3`.
pub fn cremona_reflect(p: &PointConfig) -> PointConfig {
    let eps = (&p.u[0] + &p.u[1] + &p.u[2]) / Q::from_integer(3.into());
    let two_eps = &eps + &eps;
    let u = p
        .u
        .iter()
        .enumerate()
        .map(|(i, x)| if i < 3 { x - &two_eps } else { x + &eps })
        .collect();
    PointConfig { u }
}

/// Reflection in `E_{i+1} - E_{j+1}` (indices are 0-based).
pub fn swap_points(p: &PointConfig, i: usize, j: usize) -> Result<PointConfig> {
    let r = p.points();
    if i >= r || j >= r {
        return Err(Error::Input(format!("point index out of range for {r} points")));
    }
    if i == j {
        return Err(Error::Input("swap needs two different points".into()));
    }
    let mut out = p.clone();
    out.u.swap(i, j);
    Ok(out)
}

/// Simple reflection `s_{alpha_k}` on configurations.
pub fn act(p: &PointConfig, k: usize) -> Result<PointConfig> {
    match k {
        0 => Ok(cremona_reflect(p)),
        _ if k < p.points() => swap_points(p, k - 1, k),
        _ => Err(Error::Input(format!("no simple root {k} for {} points", p.points()))),
    }
}

/// Apply simple reflections, rightmost first.
pub fn act_word(p: &PointConfig, word: &[usize]) -> Result<PointConfig> {
    word.iter().rev().try_fold(p.clone(), |acc, &k| act(&acc, k))
}

/// Parameters `lambda_node = chi_p(alpha_k)` on [`PicardLattice::star_graph`].
pub fn params(p: &PointConfig) -> ParamVector<Q> {
    let lat = p.lattice();
    let mut out = vec![Q::zero(); lat.points()];
    for k in 0..lat.points() {
        out[lat.node_of(k)] = chi(p, &lat.alpha(k)).expect("simple roots are orthogonal to delta");
    }
    ParamVector(out)
}

/// Configuration with the given parameters. For nine points the
/// parameters only fix the configuration up to the direction `sum u_i`, so
/// the sum must be supplied.
pub fn config_from_params(r: usize, lambda: &ParamVector<Q>) -> Result<PointConfig> {
    let lat = PicardLattice::new(r)?;
    if lambda.len() != r {
        return Err(Error::Shape(format!("expected {r} parameters, got {}", lambda.len())));
    }
    let m = alpha_matrix(&lat);
    let inv = m
        .inverse()
        .ok_or_else(|| Error::Degenerate("simple roots do not determine the configuration".into()))?;
    let u = (0..r)
        .map(|i| (0..r).map(|k| &inv[(i, k)] * &lambda.0[k]).sum())
        .collect();
    Ok(PointConfig { u })
}

/// Row `node` holds the `beta` coordinates of the simple root on that node.
fn alpha_matrix(lat: &PicardLattice) -> Mat<Q> {
    let r = lat.points();
    let mut m = Mat::zeros(r, r);
    for k in 0..r {
        let c = lat.beta_coords(&lat.alpha(k)).expect("simple root");
        for (i, v) in c.into_iter().enumerate() {
            m[(lat.node_of(k), i)] = v;
        }
    }
    m
}

/// Cartan matrix of [`PicardLattice::star_graph`].
pub fn cartan(lat: &PicardLattice) -> CartanMatrix {
    cartan_matrix(&lat.star_graph())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    /// `u_i = u_j`
    Coincident,
    /// `u_i + u_j + u_k = 0`
    Collinear,
    /// six points sum to zero
    Conic,
    /// `2u_i` plus seven other points sum to zero
    Cubic,
}

/// A violated genericity condition. `points` are 0-based; for a cubic wall
/// the first entry is the doubled point. With nine points the condition
/// holds modulo `sum u_i`, and `value = multiple * sum u_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wall {
    pub kind: WallKind,
    pub points: Vec<usize>,
    pub multiple: i64,
}

impl Wall {
    /// The root (up to sign and multiples of `delta`) whose `chi` vanishes.
    pub fn root(&self, lat: &PicardLattice) -> PicElem {
        let mut v = lat.zero();
        let e = |v: &mut PicElem, i: usize, c: i64| v.0[i] += Q::from_integer(c.into());
        match self.kind {
            WallKind::Coincident => {
                e(&mut v, self.points[0] + 1, 1);
                e(&mut v, self.points[1] + 1, -1);
            }
            WallKind::Collinear | WallKind::Conic => {
                e(&mut v, 0, if self.kind == WallKind::Collinear { 1 } else { 2 });
                for &i in &self.points {
                    e(&mut v, i + 1, -1);
                }
            }
            WallKind::Cubic => {
                e(&mut v, 0, 3);
                e(&mut v, self.points[0] + 1, -1);
                for &i in &self.points {
                    e(&mut v, i + 1, -1);
                }
            }
        }
        v
    }
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            WallKind::Coincident => "coincident",
            WallKind::Collinear => "collinear",
            WallKind::Conic => "conic",
            WallKind::Cubic => "cubic",
        };
        let pts: Vec<String> = self.points.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{kind}({})", pts.join(" "))?;
        if self.multiple != 0 {
            write!(f, " mod {}", self.multiple)?;
        }
        Ok(())
    }
}

fn combinations(n: usize, k: usize, skip: Option<usize>) -> Vec<Vec<usize>> {
    let pool: Vec<usize> = (0..n).filter(|&i| Some(i) != skip).collect();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > pool.len() {
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == pool.len() - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every wall condition the configuration satisfies.
pub fn wall_check(p: &PointConfig) -> Vec<Wall> {
    let r = p.points();
    let total = p.sum();
    // value vanishes, or for nine points is an integer multiple of the sum
    let hit = |value: Q| -> Option<i64> {
        if value.is_zero() {
            return Some(0);
        }
        if r < 9 || total.is_zero() {
            return None;
        }
        let ratio = value / &total;
        if ratio.is_integer() {
            ratio.to_integer().to_i64()
        } else {
            None
        }
    };
    let sum_of = |pts: &[usize]| -> Q { pts.iter().map(|&i| &p.u[i]).sum() };
    let mut walls = Vec::new();
    for pair in combinations(r, 2, None) {
        if let Some(multiple) = hit(&p.u[pair[0]] - &p.u[pair[1]]) {
            walls.push(Wall { kind: WallKind::Coincident, points: pair, multiple });
        }
    }
    for triple in combinations(r, 3, None) {
        if let Some(multiple) = hit(sum_of(&triple)) {
            walls.push(Wall { kind: WallKind::Collinear, points: triple, multiple });
        }
    }
    for six in combinations(r, 6, None) {
        if let Some(multiple) = hit(sum_of(&six)) {
            walls.push(Wall { kind: WallKind::Conic, points: six, multiple });
        }
    }
    for i in 0..r {
        for seven in combinations(r, 7, Some(i)) {
            let value = &p.u[i] + &p.u[i] + sum_of(&seven);
            if let Some(multiple) = hit(value) {
                let mut points = vec![i];
                points.extend(seven);
                walls.push(Wall { kind: WallKind::Cubic, points, multiple });
            }
        }
    }
    walls
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SakaiRow {
    pub step: usize,
    pub config: PointConfig,
    pub params: Vec<String>,
    pub walls: Vec<Wall>,
}

/// Translation by `mu` in parameter coordinates (on the star graph nodes):
/// `u` moves by the fixed vector whose parameters are `mu`. With nine
/// points the configuration must be normalized to `sum u_i = 1` and `mu`
/// must have level zero.
pub fn translation_vector(p: &PointConfig, mu: &[i64]) -> Result<Vec<Q>> {
    let lat = p.lattice();
    let r = lat.points();
    if mu.len() != r {
        return Err(Error::Shape(format!("translation has {} entries, expected {r}", mu.len())));
    }
    if r == 9 {
        if !p.sum().is_one() {
            return Err(Error::Input("nine-point configurations must be normalized to sum 1".into()));
        }
        let delta = lat.star_graph().delta().expect("affine");
        let lvl: i64 = delta.0.iter().zip(mu).map(|(a, b)| a * b).sum();
        if lvl != 0 {
            return Err(Error::Input(format!("translation has level {lvl}, expected 0")));
        }
    }
    Ok(config_from_params(r, &ParamVector::from_ints(mu))?.u)
}

pub fn sakai_orbit(p: &PointConfig, mu: &[i64], steps: usize) -> Result<Vec<SakaiRow>> {
    let d = translation_vector(p, mu)?;
    let mut cur = p.clone();
    let mut rows = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            cur.u = cur.u.iter().zip(&d).map(|(a, b)| a + b).collect();
        }
        rows.push(SakaiRow {
            step,
            params: params(&cur).0.iter().map(format_q).collect(),
            walls: wall_check(&cur),
            config: cur.clone(),
        });
    }
    Ok(rows)
}
