//! Fuchsian systems `d - sum A_i/(z - a_i) dz` on the trivial bundle over the
//! sphere, encoded by their residues.
//!
//! A system has `m` residues `A_1..A_m`; the first `m - 1` sit at finite
//! poles and `A_m` is the residue attached to infinity, stored shifted so
//! that `A_1 + ... + A_m = nu Id` (the true residue at infinity of the
//! connection form is `A_m - nu`). Residue `i` corresponds to leg `i` of the
//! star graph. Alongside the matrices every system carries the exact
//! eigenvalues of each residue, one entry per copy, in slot order: slot 0
//! (the eigenvalue whose multiplicity is `n - d_1`), then slot 1, and so on,
//! where `d_1 > d_2 > ...` are the dimensions down the leg. Exact data is
//! authoritative, matrices are numerical witnesses.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynkin::{AffineType, ParamVector, RootSystem, StarGraph};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::{cq_from_c64, q, Scalar, C64, CQ, Q};

/// Default relative tolerance for orbit membership checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A semisimple adjoint orbit: ordered distinct eigenvalues with
/// multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSpec {
    pub n: usize,
    pub eigenvalues: Vec<CQ>,
    pub multiplicities: Vec<usize>,
    pub semisimple: bool,
}

impl OrbitSpec {
    pub fn new(eigenvalues: Vec<CQ>, multiplicities: Vec<usize>) -> Result<Self> {
        if eigenvalues.len() != multiplicities.len() || multiplicities.contains(&0) {
            return Err(Error::Input("one positive multiplicity per eigenvalue".into()));
        }
        Ok(Self {
            n: multiplicities.iter().sum(),
            eigenvalues,
            multiplicities,
            semisimple: true,
        })
    }

    /// Every eigenvalue repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<CQ> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(e, &m)| std::iter::repeat_n(e.clone(), m))
            .collect()
    }

    /// Merge equal eigenvalues, keeping the first occurrence's position.
    fn merged(mut self) -> Self {
        let mut eigenvalues: Vec<CQ> = Vec::new();
        let mut multiplicities: Vec<usize> = Vec::new();
        for (e, m) in self.eigenvalues.drain(..).zip(self.multiplicities.drain(..)) {
            match eigenvalues.iter().position(|x| *x == e) {
                Some(k) => multiplicities[k] += m,
                None => {
                    eigenvalues.push(e);
                    multiplicities.push(m);
                }
            }
        }
        self.eigenvalues = eigenvalues;
        self.multiplicities = multiplicities;
        self
    }
}

/// Multiplicities of the slots of a residue of size `n` whose leg has
/// dimensions `leg_dims` (next to the center first).
pub fn slot_sizes(n: usize, leg_dims: &[usize]) -> Vec<usize> {
    let mut dims = vec![n];
    dims.extend_from_slice(leg_dims);
    dims.push(0);
    dims.windows(2).map(|w| w[0] - w[1]).collect()
}

/// Eigenvalues in slot order in the determinant-zero normalization: `0`
/// followed by the negated partial sums of the leg parameters.
pub fn slot_eigenvalues<F: Scalar>(params: &[F]) -> Vec<F> {
    let mut out = vec![F::zero()];
    let mut acc = F::zero();
    for p in params {
        acc = acc - p.clone();
        out.push(acc.clone());
    }
    out
}

/// Determinant-zero orbit of a residue of size `n` with leg dimensions
/// `leg_dims` and leg parameters `params` (both listed outward from the
/// center). Coinciding eigenvalues are merged.
pub fn orbit_from_leg(n: usize, leg_dims: &[usize], params: &[CQ]) -> Result<OrbitSpec> {
    if leg_dims.len() != params.len() {
        return Err(Error::Shape("one parameter per leg node".into()));
    }
    if leg_dims.first().is_some_and(|&d| d >= n) || leg_dims.windows(2).any(|w| w[1] >= w[0]) || leg_dims.last() == Some(&0) {
        return Err(Error::Input("leg dimensions must strictly decrease from below n".into()));
    }
    Ok(OrbitSpec::new(slot_eigenvalues(params), slot_sizes(n, leg_dims))?.merged())
}

/// Leg dimensions `rank (A - xi_1) ... (A - xi_j)` of a semisimple orbit.
pub fn leg_from_orbit(spec: &OrbitSpec) -> Vec<usize> {
    let mut left = spec.n;
    let mut out = Vec::new();
    for &m in &spec.multiplicities[..spec.multiplicities.len().saturating_sub(1)] {
        left -= m;
        out.push(left);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    General,
    TraceZero,
    DetZero,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::General => "general",
            Normalization::TraceZero => "trace_zero",
            Normalization::DetZero => "det_zero",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Normalization::General),
            "trace_zero" => Ok(Normalization::TraceZero),
            "det_zero" => Ok(Normalization::DetZero),
            _ => Err(Error::Input(format!("unknown normalization {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FuchsianSystem {
    pub ty: AffineType,
    /// Finite poles `a_1..a_{m-1}`.
    pub poles: Vec<C64>,
    pub residues: Vec<CMat>,
    pub nu: CQ,
    pub spectra: Vec<Vec<CQ>>,
    pub normalization: Normalization,
}

pub fn to_cq(v: &Q) -> CQ {
    CQ::new(v.clone(), Q::zero())
}

impl FuchsianSystem {
    /// Shape-checked constructor; no numerical verification.
    pub fn new(
        ty: AffineType,
        poles: Vec<C64>,
        residues: Vec<CMat>,
        nu: CQ,
        spectra: Vec<Vec<CQ>>,
        normalization: Normalization,
    ) -> Result<Self> {
        let g = ty.graph();
        let m = g.num_legs();
        let n = g.delta().expect("affine").0[0] as usize;
        if residues.len() != m || spectra.len() != m || poles.len() + 1 != m {
            return Err(Error::Shape(format!(
                "{ty} needs {m} residues, {m} spectra and {} finite poles",
                m - 1
            )));
        }
        if residues.iter().any(|a| a.nrows() != n || a.ncols() != n) || spectra.iter().any(|s| s.len() != n) {
            return Err(Error::Shape(format!("{ty} residues are {n}x{n}")));
        }
        for (i, a) in poles.iter().enumerate() {
            if poles[..i].iter().any(|b| (a - b).norm() < 1e-12) {
                return Err(Error::Input("poles must be distinct".into()));
            }
        }
        Ok(Self {
            ty,
            poles,
            residues,
            nu,
            spectra,
            normalization,
        })
    }

    pub fn graph(&self) -> StarGraph {
        self.ty.graph()
    }

    pub fn n(&self) -> usize {
        self.residues[0].nrows()
    }

    pub fn m(&self) -> usize {
        self.residues.len()
    }

    pub fn leg_dims(&self, i: usize) -> Vec<usize> {
        let g = self.graph();
        let d = g.delta().expect("affine");
        g.leg_nodes(i).map(|k| d.0[k] as usize).collect()
    }

    pub fn slot_sizes(&self, i: usize) -> Vec<usize> {
        slot_sizes(self.n(), &self.leg_dims(i))
    }

    /// Copy ranges of each slot of residue `i`.
    pub fn slot_ranges(&self, i: usize) -> Vec<std::ops::Range<usize>> {
        let mut start = 0;
        self.slot_sizes(i)
            .into_iter()
            .map(|s| {
                let r = start..start + s;
                start += s;
                r
            })
            .collect()
    }

    /// One value per slot, or `None` if copies within a slot differ.
    pub fn slot_values(&self, i: usize) -> Option<Vec<CQ>> {
        self.slot_ranges(i)
            .into_iter()
            .map(|r| {
                let first = self.spectra[i][r.start].clone();
                self.spectra[i][r].iter().all(|v| *v == first).then_some(first)
            })
            .collect()
    }

    /// The exact parameters read off the spectra and `nu`.
    pub fn params(&self) -> Result<ParamVector<CQ>> {
        let g = self.graph();
        let mut lambda = ParamVector::zeros(g.num_nodes());
        let mut offsets = CQ::zero();
        for i in 0..self.m() {
            let vals = self.slot_values(i).ok_or_else(|| {
                Error::Degenerate(format!("residue {} has unequal copies within a slot", i + 1))
            })?;
            offsets = offsets + vals[0].clone();
            for (depth, w) in vals.windows(2).enumerate() {
                lambda.0[g.node(i, depth + 1)] = w[0].clone() - w[1].clone();
            }
        }
        lambda.0[0] = self.nu.clone() - offsets;
        Ok(lambda)
    }

    /// Predicted orbit of residue `i` from the exact spectrum.
    pub fn orbit_spec(&self, i: usize) -> OrbitSpec {
        let sizes = self.slot_sizes(i);
        let ranges = self.slot_ranges(i);
        let vals: Vec<CQ> = ranges.iter().map(|r| self.spectra[i][r.start].clone()).collect();
        if self.slot_values(i).is_some() {
            OrbitSpec::new(vals, sizes).expect("positive sizes").merged()
        } else {
            OrbitSpec::new(self.spectra[i].clone(), vec![1; self.n()])
                .expect("positive sizes")
                .merged()
        }
    }

    /// `||sum A_i - nu|| / max(1, sum ||A_i||)`.
    pub fn sum_defect(&self) -> f64 {
        let n = self.n();
        let total = self
            .residues
            .iter()
            .fold(CMat::zeros(n, n), |acc, a| acc + a);
        let scale = self.residues.iter().map(|a| a.norm()).sum::<f64>().max(1.0);
        (total - linalg::scalar(n, self.nu.to_c64())).norm() / scale
    }

    /// Relative characteristic polynomial error of each residue.
    pub fn orbit_errors(&self) -> Vec<f64> {
        self.residues
            .iter()
            .zip(&self.spectra)
            .map(|(a, s)| linalg::spectrum_error(a, s))
            .collect()
    }

    /// `rank (A_i - xi_0) ... (A_i - xi_j)` for the slots of residue `i`.
    pub fn numeric_leg_dims(&self, i: usize, tol: f64) -> Option<Vec<usize>> {
        let vals = self.slot_values(i)?;
        let a = &self.residues[i];
        let n = self.n();
        let scale = linalg::max_abs(a).max(1.0);
        let mut prod = linalg::identity(n);
        let mut out = Vec::new();
        for v in &vals[..vals.len() - 1] {
            prod = (a - linalg::scalar(n, v.to_c64())) * prod / C64::new(scale, 0.0);
            out.push(linalg::rank(&prod, tol));
        }
        Some(out)
    }

    /// Verify `sum A_i = nu`, the characteristic polynomials, and (for
    /// slot-consistent spectra) semisimplicity through the leg ranks.
    pub fn check(&self, tol: f64) -> Result<()> {
        let defect = self.sum_defect();
        if defect > tol {
            return Err(Error::Degenerate(format!("sum of residues differs from nu by {defect:.3e}")));
        }
        for (i, err) in self.orbit_errors().into_iter().enumerate() {
            if err > tol {
                return Err(Error::Degenerate(format!(
                    "residue {} misses its orbit: relative error {err:.3e}",
                    i + 1
                )));
            }
        }
        for i in 0..self.m() {
            if let Some(dims) = self.numeric_leg_dims(i, 1e-7) {
                if dims != self.leg_dims(i) {
                    return Err(Error::Degenerate(format!(
                        "residue {} is not semisimple: ranks {dims:?}, expected {:?}",
                        i + 1,
                        self.leg_dims(i)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Simultaneous conjugation `g A_i g^-1`.
    pub fn conjugate(&self, g: &CMat) -> Result<Self> {
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular conjugating matrix".into()))?;
        let mut out = self.clone();
        for a in &mut out.residues {
            *a = g * &*a * &inv;
        }
        Ok(out)
    }

    /// Sum of squared Frobenius norms of all residues.
    pub fn norm_sq(&self) -> f64 {
        self.residues.iter().map(|a| a.norm_squared()).sum()
    }

    /// Conjugate towards a point of minimal norm in the orbit by descending
    /// along `-sum [A_i, A_i^*]` with backtracking. Spectra and traces of
    /// words are unchanged.
    pub fn balanced(&self, iters: usize) -> Self {
        let n = self.n();
        let mut cur = self.clone();
        let mut f = cur.norm_sq();
        let mut t = 0.25 / f.max(1.0);
        for _ in 0..iters {
            let mut grad = CMat::zeros(n, n);
            for a in &cur.residues {
                let ah = a.adjoint();
                grad += a * &ah - &ah * a;
            }
            let gnorm = grad.norm();
            if gnorm < 1e-12 * f.max(1.0) {
                break;
            }
            let eig = grad.symmetric_eigen();
            let conj_by = |t: f64| -> (CMat, CMat) {
                let d = |s: f64| {
                    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                        n,
                        eig.eigenvalues.iter().map(|&e| C64::new((s * t * e).exp(), 0.0)),
                    ))
                };
                let u = &eig.eigenvectors;
                let g = u * d(-1.0) * u.adjoint();
                // the eigenvectors are only unitary to working accuracy
                let g_inv = g.clone().try_inverse().unwrap_or_else(|| u * d(1.0) * u.adjoint());
                (g, g_inv)
            };
            let mut accepted = false;
            for _ in 0..30 {
                let (g, g_inv) = conj_by(t);
                let mut next = cur.clone();
                for a in &mut next.residues {
                    *a = &g * &*a * &g_inv;
                }
                let fn_ = next.norm_sq();
                if fn_ < f {
                    cur = next;
                    f = fn_;
                    t *= 1.5;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        cur
    }

    /// Pull the residues back onto their exact orbits after floating-point
    /// drift: every finite residue is rebuilt as `S D S^-1` from its
    /// eigenspaces and the exact eigenvalues, then the finite residues are
    /// moved along their orbits (least-norm Gauss-Newton) until
    /// `nu - sum A_i` has the exact eigenvalues at infinity. Returns `self`
    /// unchanged if that does not reduce the orbit errors.
    pub fn polished(&self, iters: usize) -> Self {
        let before = self.orbit_errors().into_iter().fold(0.0, f64::max);
        let mut cur = self.clone();
        for _ in 0..iters {
            if cur.snap_finite().is_err() || cur.newton_infinity().is_err() {
                return self.clone();
            }
        }
        if cur.snap_finite().is_err() {
            return self.clone();
        }
        let after = cur.orbit_errors().into_iter().fold(0.0, f64::max);
        if after < before {
            cur
        } else {
            self.clone()
        }
    }

    fn snap_finite(&mut self) -> Result<()> {
        let n = self.n();
        let inf = self.m() - 1;
        for i in 0..inf {
            let spec: Vec<C64> = self.spectra[i].iter().map(Scalar::to_c64).collect();
            let mut cols = Vec::with_capacity(n);
            let mut diag = Vec::with_capacity(n);
            let mut seen: Vec<C64> = Vec::new();
            for &t in &spec {
                if seen.contains(&t) {
                    continue;
                }
                seen.push(t);
                let mult = spec.iter().filter(|&&e| e == t).count();
                let (basis, _) = linalg::null_space(&(&self.residues[i] - linalg::scalar(n, t)), mult);
                for c in basis.column_iter() {
                    cols.push(c.into_owned());
                    diag.push(t);
                }
            }
            let s = CMat::from_columns(&cols);
            let s_inv = s
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Degenerate("eigenvectors are dependent".into()))?;
            let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(diag));
            self.residues[i] = &s * d * s_inv;
        }
        self.recompute_infinity();
        Ok(())
    }

    fn recompute_infinity(&mut self) {
        let n = self.n();
        let inf = self.m() - 1;
        let finite = self.residues[..inf].iter().fold(CMat::zeros(n, n), |acc, a| acc + a);
        self.residues[inf] = linalg::scalar(n, self.nu.to_c64()) - finite;
    }

    /// One Gauss-Newton step on the (simple) eigenvalues at infinity.
    fn newton_infinity(&mut self) -> Result<()> {
        let n = self.n();
        let inf = self.m() - 1;
        let targets: Vec<C64> = self.spectra[inf].iter().map(Scalar::to_c64).collect();
        let simple = targets.iter().enumerate().all(|(k, t)| !targets[..k].contains(t));
        if !simple {
            return Ok(());
        }
        let a_inf = &self.residues[inf];
        // first-order eigenvalue and eigenvectors nearest each target
        let mut rows: Vec<Vec<C64>> = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for &t in &targets {
            let shifted = a_inf - linalg::scalar(n, t);
            let (v, _) = linalg::right_null_vector(&shifted);
            let (u, _) = linalg::left_null_vector(&shifted);
            let uv = linalg::inner(&u, &v);
            if uv.norm() < 1e-10 {
                return Err(Error::Degenerate("eigenvalue at infinity is ill-conditioned".into()));
            }
            let lambda = t + linalg::inner(&u, &(&shifted * linalg::column(&v)).column(0).iter().copied().collect::<Vec<_>>()) / uv;
            rhs.push(t - lambda);
            // d lambda = u* dA v / u*v with dA = -sum [X_i, A_i]
            let vu = linalg::column(&v) * linalg::column(&u).adjoint() / uv;
            let mut row = Vec::with_capacity(inf * n * n);
            for a in &self.residues[..inf] {
                let g = a * &vu - &vu * a;
                // -tr(X g) = sum_ab X_ab (-g_ba)
                for r in 0..n {
                    for c in 0..n {
                        row.push(-g[(c, r)]);
                    }
                }
            }
            rows.push(row);
        }
        let width = inf * n * n;
        let jac = CMat::from_fn(n, width, |k, x| rows[k][x]);
        // the eigenvalue sum is fixed by the trace, so the system has rank n - 1
        let gram = &jac * jac.adjoint();
        let cut = 1e-12 * gram.norm();
        let y = gram
            .pseudo_inverse(cut)
            .map_err(|_| Error::Degenerate("singular Gauss-Newton system".into()))?
            * CMat::from_column_slice(n, 1, &rhs);
        let x = jac.adjoint() * y;
        for (i, a) in self.residues[..inf].iter_mut().enumerate() {
            let xi = CMat::from_fn(n, n, |r, c| x[(i * n * n + r * n + c, 0)]);
            *a = &*a + (&xi * &*a - &*a * &xi);
        }
        self.recompute_infinity();
        Ok(())
    }

    /// Add the scalar `c` to residue `i` (matrix and spectrum).
    pub(crate) fn shift_residue(&mut self, i: usize, c: &CQ) {
        let n = self.n();
        self.residues[i] += linalg::scalar(n, c.to_c64());
        for e in &mut self.spectra[i] {
            *e = e.clone() + c.clone();
        }
    }

    pub fn normalize(&self, mode: Normalization) -> Self {
        let mut out = self.clone();
        let m = self.m();
        let inf = m - 1;
        match mode {
            Normalization::General => {}
            Normalization::TraceZero => {
                let n = CQ::from_i64(self.n() as i64);
                for i in 0..inf {
                    let tr = out.spectra[i].iter().fold(CQ::zero(), |a, b| a + b.clone());
                    let c = -(tr / n.clone());
                    out.shift_residue(i, &c);
                    out.shift_residue(inf, &-c);
                }
            }
            Normalization::DetZero => {
                for i in 0..inf {
                    let c = -out.spectra[i][0].clone();
                    out.shift_residue(i, &c);
                    out.shift_residue(inf, &-c);
                }
                let c = out.spectra[inf][0].clone();
                out.shift_residue(inf, &-c.clone());
                out.nu = out.nu.clone() - c;
            }
        }
        out.normalization = mode;
        out
    }

    /// Traces of all words of length `1..=max_len` in `A_1..A_{m-1}`,
    /// ordered by length and then lexicographically.
    pub fn signature(&self, max_len: usize) -> Vec<C64> {
        let gens = &self.residues[..self.m() - 1];
        let n = self.n();
        let mut out = Vec::new();
        let mut layer = vec![linalg::identity(n)];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * gens.len());
            for w in &layer {
                for a in gens {
                    let p = w * a;
                    out.push(p.trace());
                    next.push(p);
                }
            }
            layer = next;
        }
        out
    }

    /// Burnside test: the words in `A_1..A_{m-1}` span all of `gl_n`.
    pub fn is_irreducible(&self, tol: f64) -> bool {
        let n = self.n();
        let gens: Vec<CMat> = self.residues[..self.m() - 1]
            .iter()
            .map(|a| {
                let s = a.norm();
                if s > 0.0 {
                    a / C64::new(s, 0.0)
                } else {
                    a.clone()
                }
            })
            .collect();
        let mut basis: Vec<CMat> = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        let start = linalg::identity(n);
        let add = |basis: &mut Vec<CMat>, x: &CMat| -> bool {
            let norm = x.norm();
            if norm == 0.0 {
                return false;
            }
            let mut r = x / C64::new(norm, 0.0);
            for _ in 0..2 {
                for b in basis.iter() {
                    let c = b.dotc(&r);
                    r -= b * c;
                }
            }
            let rn = r.norm();
            if rn > tol.max(1e-10) {
                basis.push(r / C64::new(rn, 0.0));
                true
            } else {
                false
            }
        };
        add(&mut basis, &start);
        queue.push_back(start / C64::new((n as f64).sqrt(), 0.0));
        let mut depth_budget = 2 * n * n;
        while let Some(x) = queue.pop_front() {
            if basis.len() == n * n || depth_budget == 0 {
                break;
            }
            depth_budget -= 1;
            for a in &gens {
                let y = a * &x;
                if add(&mut basis, &y) {
                    let s = y.norm();
                    queue.push_back(y / C64::new(s, 0.0));
                }
            }
        }
        basis.len() == n * n
    }
}

/// `||a - b||_inf / max(1, ||a||_inf)`.
pub fn signature_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let scale = a.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm())) / scale
}

#[derive(Clone, Debug)]
pub struct SampleOptions {
    /// Position of the second finite pole for D4 (poles `0, t, 1, inf`).
    pub d4_t: C64,
    pub max_tries: usize,
    /// Upper bound on the condition number of the conjugating matrices.
    pub max_condition: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            d4_t: C64::new(0.5, 0.0),
            max_tries: 16,
            max_condition: 50.0,
        }
    }
}

pub fn default_poles(ty: AffineType, d4_t: C64) -> Vec<C64> {
    match ty {
        AffineType::D4 => vec![C64::new(0.0, 0.0), d4_t, C64::new(1.0, 0.0)],
        _ => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    }
}

/// A Gaussian rational with small denominators, never an integer and never
/// close to zero.
fn random_cq<R: Rng>(rng: &mut R) -> CQ {
    loop {
        let re = q(rng.random_range(-9..=9), rng.random_range(2..=7));
        let im = q(rng.random_range(-9..=9), rng.random_range(2..=7));
        let v = CQ::new(re, im);
        if !v.is_integral() && v.to_c64().norm() > 0.25 {
            return v;
        }
    }
}

fn lex_cmp(a: &C64, b: &C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn min_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[..i] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

/// Random determinant-zero system of the given type with regular parameters.
pub fn sample_system(ty: AffineType, seed: u64) -> Result<(FuchsianSystem, ParamVector<CQ>)> {
    sample_system_with(ty, seed, &SampleOptions::default())
}

pub fn sample_system_with(ty: AffineType, seed: u64, opts: &SampleOptions) -> Result<(FuchsianSystem, ParamVector<CQ>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roots = RootSystem::new(ty);
    let mut last = String::new();
    for _ in 0..opts.max_tries {
        match sample_once(ty, &mut rng, opts, &roots) {
            Ok(v) => return Ok(v),
            Err(Error::Degenerate(msg)) | Err(Error::Wall(msg)) => last = msg,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Degenerate(format!(
        "no generic {ty} sample after {} tries: {last}",
        opts.max_tries
    )))
}

fn sample_once(
    ty: AffineType,
    rng: &mut ChaCha8Rng,
    opts: &SampleOptions,
    roots: &RootSystem,
) -> Result<(FuchsianSystem, ParamVector<CQ>)> {
    let g = ty.graph();
    let m = g.num_legs();
    let n = roots.delta.0[0] as usize;
    let delta = &roots.delta;
    let mut residues = Vec::with_capacity(m);
    let mut spectra = Vec::with_capacity(m);
    for i in 0..m - 1 {
        let leg: Vec<usize> = g.leg_nodes(i).map(|k| delta.0[k] as usize).collect();
        let params: Vec<CQ> = (0..leg.len()).map(|_| random_cq(rng)).collect();
        let vals = slot_eigenvalues(&params);
        let sizes = slot_sizes(n, &leg);
        let spec: Vec<CQ> = vals
            .iter()
            .zip(&sizes)
            .flat_map(|(v, &s)| std::iter::repeat_n(v.clone(), s))
            .collect();
        let conj = loop {
            let c = linalg::ginibre(n, rng);
            if linalg::condition(&c) < opts.max_condition {
                break c;
            }
        };
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, spec.iter().map(Scalar::to_c64)));
        let inv = conj.clone().try_inverse().expect("well conditioned");
        residues.push(&conj * d * inv);
        spectra.push(spec);
    }
    let nu = random_cq(rng);
    let finite_sum = residues.iter().fold(CMat::zeros(n, n), |acc, a| acc + a);
    let a_inf = linalg::scalar(n, nu.to_c64()) - finite_sum;
    let mut eig = linalg::eigenvalues(&a_inf);
    eig.sort_by(lex_cmp);
    let scale = eig.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    if min_gap(&eig) < 1e-3 * scale {
        return Err(Error::Degenerate("eigenvalues at infinity nearly coincide".into()));
    }
    let mut inf_spec: Vec<CQ> = eig.iter().map(|&z| cq_from_c64(z)).collect::<Result<_>>()?;
    // the trace identity sum tr A_i = n nu fixes the last eigenvalue exactly
    let total: CQ = spectra.iter().flatten().chain(&inf_spec[..n - 1]).fold(CQ::zero(), |a, b| a + b.clone());
    inf_spec[n - 1] = nu.clone() * CQ::from_i64(n as i64) - total;
    residues.push(a_inf);
    spectra.push(inf_spec);
    let sys = FuchsianSystem::new(
        ty,
        default_poles(ty, opts.d4_t),
        residues,
        nu,
        spectra,
        Normalization::General,
    )?
    .normalize(Normalization::DetZero);
    let lambda = sys.params()?;
    if lambda.0[0].is_zero() {
        return Err(Error::Wall("nu vanishes".into()));
    }
    let reg = roots.is_regular(&lambda);
    if !reg.regular {
        return Err(Error::Wall(format!("sample lies on {} root hyperplanes", reg.violated.len())));
    }
    for i in 0..m {
        let vals: Vec<C64> = sys.slot_values(i).expect("consistent").iter().map(Scalar::to_c64).collect();
        if min_gap(&vals) < 1e-6 {
            return Err(Error::Degenerate(format!("residue {} has coinciding slots", i + 1)));
        }
    }
    sys.check(1e-8)?;
    Ok((sys, lambda))
}

impl FuchsianSystem {
    /// Determinant-zero spectra (slot order, one entry per copy) implied by
    /// `lambda`.
    pub fn predicted_spectra(ty: AffineType, lambda: &ParamVector<CQ>) -> Vec<Vec<CQ>> {
        let g = ty.graph();
        let delta = g.delta().expect("affine");
        let n = delta.0[0] as usize;
        (0..g.num_legs())
            .map(|i| {
                let leg: Vec<usize> = g.leg_nodes(i).map(|k| delta.0[k] as usize).collect();
                let params: Vec<CQ> = g.leg_nodes(i).map(|k| lambda.0[k].clone()).collect();
                slot_eigenvalues(&params)
                    .into_iter()
                    .zip(slot_sizes(n, &leg))
                    .flat_map(|(v, s)| std::iter::repeat_n(v, s))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real;

    fn cqi(n: i64, d: i64) -> CQ {
        real(q(n, d))
    }

    #[test]
    fn four_step_leg_orbit() {
        let (a, b, c) = (cqi(1, 3), cqi(2, 5), cqi(-1, 7));
        let spec = orbit_from_leg(4, &[3, 2, 1], &[c.clone(), b.clone(), a.clone()]).unwrap();
        assert_eq!(
            spec.eigenvalues,
            vec![cqi(0, 1), -c.clone(), -c.clone() - b.clone(), -c - b - a]
        );
        assert_eq!(spec.multiplicities, vec![1; 4]);
        let zero = orbit_from_leg(4, &[3, 2, 1], &[cqi(0, 1), cqi(0, 1), cqi(0, 1)]).unwrap();
        assert_eq!(zero.eigenvalues, vec![cqi(0, 1)]);
        assert_eq!(zero.multiplicities, vec![4]);
    }

    #[test]
    fn incremented_e7_leg_orbit() {
        let (l2, l7, l8) = (cqi(3, 2), cqi(-1, 3), cqi(5, 4));
        let spec = orbit_from_leg(5, &[3, 2, 1], &[l2.clone(), l7.clone(), l8.clone()]).unwrap();
        assert_eq!(
            spec.expanded(),
            vec![cqi(0, 1), cqi(0, 1), -l2.clone(), -l2.clone() - l7.clone(), -l2 - l7 - l8]
        );
    }

    #[test]
    fn legs_from_orbits() {
        let e = |k: i64| cqi(k, 1);
        assert_eq!(leg_from_orbit(&OrbitSpec::new(vec![e(0), e(1)], vec![3, 3]).unwrap()), vec![3]);
        assert_eq!(
            leg_from_orbit(&OrbitSpec::new(vec![e(0), e(1), e(2)], vec![2, 2, 2]).unwrap()),
            vec![4, 2]
        );
        assert_eq!(
            leg_from_orbit(&OrbitSpec::new((0..6).map(e).collect(), vec![1; 6]).unwrap()),
            vec![5, 4, 3, 2, 1]
        );
        assert_eq!(leg_from_orbit(&OrbitSpec::new((0..3).map(e).collect(), vec![1; 3]).unwrap()), vec![2, 1]);
        let params = vec![cqi(1, 2), cqi(1, 3)];
        let spec = orbit_from_leg(3, &[2, 1], &params).unwrap();
        assert_eq!(leg_from_orbit(&spec), vec![2, 1]);
    }

    #[test]
    fn samples_have_tabulated_shapes() {
        for ty in AffineType::ALL {
            let (sys, lambda) = sample_system(ty, 7).unwrap();
            sys.check(1e-9).unwrap();
            assert_eq!(lambda, sys.params().unwrap());
            assert!(ty.graph().delta().unwrap().dot(&lambda).is_zero());
            assert_eq!(sys.normalization, Normalization::DetZero);
        }
        let (e8, _) = sample_system(AffineType::E8, 1).unwrap();
        assert_eq!(e8.n(), 6);
        assert_eq!(e8.slot_sizes(0), vec![3, 3]);
        assert_eq!(e8.slot_sizes(1), vec![2, 2, 2]);
        assert_eq!(e8.slot_sizes(2), vec![1; 6]);
        let (d4, _) = sample_system(AffineType::D4, 1).unwrap();
        for a in &d4.residues {
            assert_eq!(linalg::rank(a, 1e-9), 1);
        }
        let (e6, _) = sample_system(AffineType::E6, 1).unwrap();
        assert!((0..3).all(|i| e6.slot_sizes(i) == vec![1, 1, 1]));
    }

    #[test]
    fn sampling_is_deterministic() {
        let (a, _) = sample_system(AffineType::E7, 42).unwrap();
        let (b, _) = sample_system(AffineType::E7, 42).unwrap();
        assert_eq!(a.residues, b.residues);
        assert_eq!(a.spectra, b.spectra);
    }

    #[test]
    fn pvi_theta_relation() {
        let (sys, lambda) = sample_system(AffineType::D4, 3).unwrap();
        let theta: Vec<CQ> = (0..4).map(|i| sys.spectra[i][1].clone()).collect();
        assert!((0..4).all(|i| sys.spectra[i][0].is_zero()));
        let sum = theta.iter().fold(CQ::zero(), |a, b| a + b.clone());
        assert_eq!(sum, sys.nu.clone() * CQ::from_i64(2));
        assert_eq!(lambda.0[0], sys.nu);
    }

    #[test]
    fn normalization_round_trip() {
        let (sys, lambda) = sample_system(AffineType::E8, 9).unwrap();
        assert_eq!(sys.normalize(Normalization::DetZero).spectra, sys.spectra);
        let tz = sys.normalize(Normalization::TraceZero);
        for i in 0..sys.m() - 1 {
            assert!(tz.residues[i].trace().norm() < 1e-10);
        }
        let n = sys.n() as f64;
        assert!((tz.residues[sys.m() - 1].trace() - tz.nu.to_c64() * n).norm() < 1e-9);
        assert_eq!(tz.params().unwrap(), lambda);
        let back = tz.normalize(Normalization::DetZero);
        assert_eq!(back.spectra, sys.spectra);
        for (a, b) in back.residues.iter().zip(&sys.residues) {
            assert!(linalg::max_abs(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn signature_invariance_and_shift() {
        let (sys, _) = sample_system(AffineType::E6, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = linalg::ginibre(3, &mut rng);
        let conj = sys.conjugate(&g).unwrap();
        assert!(signature_distance(&sys.signature(4), &conj.signature(4)) < 1e-9);
        let one = sys.signature(1);
        assert_eq!(one.len(), 2);
        assert!((one[0] - sys.residues[0].trace()).norm() < 1e-12);
        let mut shifted = sys.clone();
        shifted.shift_residue(0, &cqi(2, 1));
        let s = shifted.signature(1);
        assert!((s[0] - (one[0] + C64::new(6.0, 0.0))).norm() < 1e-9);
        assert!((s[1] - one[1]).norm() < 1e-12);
    }

    #[test]
    fn burnside_test() {
        let (sys, _) = sample_system(AffineType::E8, 2).unwrap();
        assert!(sys.is_irreducible(1e-8));
        let mut red = sys.clone();
        for a in red.residues.iter_mut().take(2) {
            for i in 3..6 {
                for j in 0..3 {
                    a[(i, j)] = C64::zero();
                }
            }
        }
        assert!(!red.is_irreducible(1e-8));
    }

    #[test]
    fn reducible_triple_on_a_hyperplane() {
        // A_1, A_2 share the invariant line spanned by e_0; on it they act by
        // eigenvalues a and b with a + b + c = nu for an eigenvalue c of A_3,
        // which puts lambda on a root hyperplane.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut a1 = linalg::ginibre(3, &mut rng);
        let mut a2 = linalg::ginibre(3, &mut rng);
        for a in [&mut a1, &mut a2] {
            a[(1, 0)] = C64::zero();
            a[(2, 0)] = C64::zero();
        }
        let nu = C64::new(0.7, 0.1);
        let a3 = linalg::scalar(3, nu) - &a1 - &a2;
        let roots = |a: &CMat| {
            let mut e = linalg::eigenvalues(a);
            e.sort_by(lex_cmp);
            e.into_iter().map(|z| cq_from_c64(z).unwrap()).collect::<Vec<_>>()
        };
        let spectra = vec![roots(&a1), roots(&a2), roots(&a3)];
        let sys = FuchsianSystem::new(
            AffineType::E6,
            default_poles(AffineType::E6, C64::new(0.5, 0.0)),
            vec![a1.clone(), a2.clone(), a3.clone()],
            cq_from_c64(nu).unwrap(),
            spectra,
            Normalization::General,
        )
        .unwrap();
        assert!(!sys.is_irreducible(1e-8));
        let on_line = a1[(0, 0)] + a2[(0, 0)] + a3[(0, 0)];
        assert!((on_line - nu).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        let (sys, _) = sample_system(AffineType::D4, 1).unwrap();
        let r = FuchsianSystem::new(
            AffineType::E6,
            sys.poles.clone(),
            sys.residues.clone(),
            sys.nu.clone(),
            sys.spectra.clone(),
            Normalization::DetZero,
        );
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn balancing_keeps_the_orbit() {
        let (sys, _) = sample_system(AffineType::E7, 4).unwrap();
        let g = crate::linalg::identity(sys.n()) + crate::linalg::ginibre(sys.n(), &mut ChaCha8Rng::seed_from_u64(9)) * C64::new(0.7, 0.0);
        let skew = sys.conjugate(&g).unwrap();
        let bal = skew.balanced(50);
        assert!(bal.norm_sq() <= skew.norm_sq());
        assert!(signature_distance(&bal.signature(3), &sys.signature(3)) < 1e-8);
        assert!(bal.orbit_errors().iter().all(|e| *e < 1e-8));
    }

    #[test]
    fn polishing_removes_drift() {
        for ty in AffineType::ALL {
            let (sys, _) = sample_system(ty, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut noisy = sys.clone();
            for a in &mut noisy.residues {
                *a += crate::linalg::ginibre(sys.n(), &mut rng) * C64::new(1e-7, 0.0);
            }
            let before = noisy.orbit_errors().into_iter().fold(0.0, f64::max);
            let after = noisy.polished(3).orbit_errors().into_iter().fold(0.0, f64::max);
            assert!(before > 1e-9, "{ty}");
            assert!(after < 1e-12, "{ty}: {before:e} -> {after:e}");
        }
    }
}
