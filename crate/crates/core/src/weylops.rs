//! Weyl group symmetries acting on Fuchsian systems.
//!
//! Leg reflections permute eigenvalues (up to a scalar renormalization),
//! the central reflection passes through the incremented quiver: a system of
//! rank `N - 1` is lifted to a pair `(P, Q)` of rank `N`, the product
//! `B = PQ` is shifted by a scalar, and the result is compressed back to
//! rank `N - 1`. Integral translations are composed from elementary
//! Schlesinger steps.

use serde::{Deserialize, Serialize};

use crate::dynkin::{apply_word, cartan_matrix, permute_legs, AffineType, ParamVector, RootSystem};
use crate::error::{Error, Result};
use crate::fuchsian::{FuchsianSystem, Normalization};
use crate::linalg::{self, CMat};
use crate::quiver::{AlmostAffineQuiver, IncrementedQuiver};
use crate::scalar::{Scalar, C64, CQ};

/// The dual description on the incremented quiver: `P` stacks the blocks
/// `P_i: C^N -> C^{n_i}`, `Q` concatenates `Q_i: C^{n_i} -> C^N`.
#[derive(Clone, Debug)]
pub struct IncrementedPair {
    pub ty: AffineType,
    pub quiver: IncrementedQuiver,
    pub poles: Vec<C64>,
    pub p: CMat,
    pub q: CMat,
    pub blocks: Vec<usize>,
    /// Parameters on the incremented quiver.
    pub params: ParamVector<CQ>,
}

impl IncrementedPair {
    pub fn big_n(&self) -> usize {
        self.p.ncols()
    }

    fn block_start(&self, i: usize) -> usize {
        self.blocks[..i].iter().sum()
    }

    pub fn p_block(&self, i: usize) -> CMat {
        self.p.rows(self.block_start(i), self.blocks[i]).into_owned()
    }

    pub fn q_block(&self, i: usize) -> CMat {
        self.q.columns(self.block_start(i), self.blocks[i]).into_owned()
    }

    /// `B = PQ`.
    pub fn b(&self) -> CMat {
        &self.p * &self.q
    }

    /// `QP = sum Q_i P_i`.
    pub fn qp(&self) -> CMat {
        &self.q * &self.p
    }

    /// The rank-`N` residues `Q_i P_i`.
    pub fn block_residues(&self) -> Vec<CMat> {
        (0..self.blocks.len()).map(|i| self.q_block(i) * self.p_block(i)).collect()
    }

    /// Eigenvalues of `B` predicted by the parameters: `l_0`, `l_0 + l_1`,
    /// ... along the center and the full leg.
    pub fn predicted_b_spectrum(&self) -> Vec<CQ> {
        let g = &self.quiver.graph;
        let mut acc = self.params.0[0].clone();
        let mut out = vec![acc.clone()];
        for node in g.leg_nodes(self.quiver.full_leg) {
            acc = acc + self.params.0[node].clone();
            out.push(acc.clone());
        }
        out
    }

    /// Eigenvalues of `P_i Q_i` predicted by the parameters.
    pub fn predicted_block_spectrum(&self, i: usize) -> Vec<CQ> {
        let g = &self.quiver.graph;
        let dims = self.quiver.dims.leg(g, i);
        let mut out = Vec::new();
        let mut acc = CQ::from_i64(0);
        for (k, node) in g.leg_nodes(i).enumerate() {
            acc = acc - self.params.0[node].clone();
            let next = dims.get(k + 1).copied().unwrap_or(0);
            out.extend(std::iter::repeat_n(acc.clone(), dims[k] - next));
        }
        out
    }

    /// Relative characteristic polynomial errors of `B` and every `P_i Q_i`.
    pub fn orbit_errors(&self) -> Vec<f64> {
        let mut out = vec![linalg::spectrum_error(&self.b(), &self.predicted_b_spectrum())];
        for i in 0..self.blocks.len() {
            let pq = self.p_block(i) * self.q_block(i);
            out.push(linalg::spectrum_error(&pq, &self.predicted_block_spectrum(i)));
        }
        out
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        match self.orbit_errors().into_iter().enumerate().find(|(_, e)| *e > tol) {
            Some((0, e)) => Err(Error::Degenerate(format!("B misses its orbit by {e:.3e}"))),
            Some((i, e)) => Err(Error::Degenerate(format!("block {i} misses its orbit by {e:.3e}"))),
            None => Ok(()),
        }
    }

    /// `B -> B + shift`, realized on the representative with `Q = Id`.
    pub fn scalar_shift(&self, shift: &CQ) -> IncrementedPair {
        let n = self.big_n();
        let mut out = self.clone();
        out.p = self.b() + linalg::scalar(n, shift.to_c64());
        out.q = linalg::identity(n);
        out.params = self.quiver.shift_params(&self.params, shift);
        out
    }

    /// Swap the first two eigenvalues of the full-leg orbit. Only the
    /// labelling changes.
    pub fn permute_first_two(&self) -> IncrementedPair {
        let mut out = self.clone();
        out.params = self.quiver.permute_params(&self.params);
        out
    }

    /// Compress the residues `Q_i P_i` to the sum `V` of the nonzero
    /// eigenspaces of `QP`, along its kernel.
    pub fn project(&self, tol: f64) -> Result<FuchsianSystem> {
        if !self.params.0[0].is_exact_zero() {
            return Err(Error::Input("projection needs a vanishing center parameter; shift first".into()));
        }
        let n_big = self.big_n();
        let c = self.qp();
        let svd = linalg::svd(&c);
        let s = &svd.s;
        let top = s[0].max(1.0);
        if s[n_big - 1] > 1e-8 * top {
            return Err(Error::Degenerate(format!("QP is invertible (smallest singular value {:.3e})", s[n_big - 1])));
        }
        if s[n_big - 2] < 1e-6 * top {
            return Err(Error::Wall("zero is not a simple eigenvalue of QP".into()));
        }
        let (u, vt) = (&svd.u, &svd.v_t);
        let k: Vec<C64> = (0..n_big).map(|j| vt[(n_big - 1, j)].conj()).collect();
        let l: Vec<C64> = (0..n_big).map(|i| u[(i, n_big - 1)]).collect();
        let lk = linalg::inner(&l, &k);
        if lk.norm() < 1e-8 {
            return Err(Error::Wall("zero eigenvalue of QP is not semisimple".into()));
        }
        let proj = linalg::identity(n_big) - linalg::column(&k) * linalg::column(&l).adjoint() / lk;
        let basis = u.columns(0, n_big - 1).into_owned();
        let basis_t = basis.adjoint();
        let mut residues: Vec<CMat> = self
            .block_residues()
            .iter()
            .map(|r| &basis_t * &proj * r * &basis)
            .collect();

        let lambda = self.quiver.project_params(&self.params);
        let nu = lambda.0[0].clone();
        let n = n_big - 1;
        let finite = residues.iter().fold(CMat::zeros(n, n), |acc, a| acc + a);
        residues.push(linalg::scalar(n, nu.to_c64()) - finite);
        let spectra = FuchsianSystem::predicted_spectra(self.ty, &lambda);
        let sys = FuchsianSystem::new(self.ty, self.poles.clone(), residues, nu, spectra, Normalization::DetZero)?;
        sys.check(tol)?;
        Ok(sys)
    }
}

/// Embed the finite residues as `diag(A_i, 0)` in rank `N = n + 1` through
/// balanced rank factorizations `A_i = X_i Y_i`.
pub fn lift(sys: &FuchsianSystem) -> Result<IncrementedPair> {
    let sys = sys.normalize(Normalization::DetZero);
    let lambda = sys.params()?;
    let quiver = AlmostAffineQuiver::affine(sys.ty).increment();
    let n = sys.n();
    let n_big = n + 1;
    let m = sys.m();
    let blocks: Vec<usize> = (0..m - 1).map(|i| sys.leg_dims(i)[0]).collect();
    if blocks.iter().sum::<usize>() != n_big {
        return Err(Error::Shape(format!(
            "finite residue ranks sum to {}, expected {n_big}",
            blocks.iter().sum::<usize>()
        )));
    }
    let mut p = CMat::zeros(n_big, n_big);
    let mut q = CMat::zeros(n_big, n_big);
    let mut offset = 0;
    for (i, &r) in blocks.iter().enumerate() {
        let (x, y) = linalg::rank_factorization(&sys.residues[i], r, 1e-8)?;
        q.view_mut((0, offset), (n, r)).copy_from(&x);
        p.view_mut((offset, 0), (r, n)).copy_from(&y);
        offset += r;
    }
    Ok(IncrementedPair {
        ty: sys.ty,
        params: quiver.lift_params(&lambda),
        quiver,
        poles: sys.poles.clone(),
        p,
        q,
        blocks,
    })
}

fn require_regular(ty: AffineType, lambda: &ParamVector<CQ>) -> Result<()> {
    let reg = RootSystem::new(ty).is_regular(lambda);
    if reg.regular {
        return Ok(());
    }
    let first = &reg.violated[0];
    Err(Error::Wall(format!(
        "parameters lie on {} root hyperplane(s), e.g. the root {:?}",
        reg.violated.len(),
        first.0
    )))
}

/// Reflection at the central node via the incremented quiver.
pub fn central_reflection(sys: &FuchsianSystem, tol: f64) -> Result<FuchsianSystem> {
    let sys = sys.normalize(Normalization::DetZero).balanced(BALANCE_ITERS).polished(POLISH_ITERS);
    let lambda = sys.params()?;
    if lambda.0[0].is_exact_zero() {
        return Err(Error::Wall("nu = 0, the central reflection acts trivially".into()));
    }
    require_regular(sys.ty, &lambda)?;
    let pair = lift(&sys)?;
    let shifted = pair.scalar_shift(&-lambda.0[0].clone());
    let out = shifted
        .permute_first_two()
        .project(tol.max(STEP_TOL))?
        .polished(POLISH_ITERS);
    out.check(tol)?;
    debug_assert_eq!(
        out.params().ok(),
        Some(apply_word(&cartan_matrix(&sys.graph()), &[0], &lambda))
    );
    Ok(out)
}

/// Reflection at a non-central node: a permutation of two adjacent slots,
/// combined with a scalar shift of the residue when the node is next to the
/// center.
pub fn leg_reflection(sys: &FuchsianSystem, node: usize) -> Result<FuchsianSystem> {
    let g = sys.graph();
    let (leg, depth) = g
        .position(node)
        .ok_or_else(|| Error::Input(format!("node {node} is not on a leg")))?;
    let mut out = sys.normalize(Normalization::DetZero);
    let sizes = out.slot_sizes(leg);
    if sizes[depth - 1] != sizes[depth] {
        return Err(Error::Input(format!(
            "slots {} and {depth} of residue {} have different multiplicities",
            depth - 1,
            leg + 1
        )));
    }
    let lambda = out.params()?;
    if depth == 1 {
        let l1 = lambda.0[node].clone();
        out.shift_residue(leg, &l1);
        out.nu = out.nu.clone() + l1;
    }
    let ranges = out.slot_ranges(leg);
    let (a, b) = (ranges[depth - 1].clone(), ranges[depth].clone());
    let spec = &mut out.spectra[leg];
    for (x, y) in a.zip(b) {
        spec.swap(x, y);
    }
    Ok(out)
}

/// `A_i -> A_i + c_i` at the finite poles, `A_m -> A_m - sum c_i`.
pub fn tensor_shift(sys: &FuchsianSystem, shifts: &[i64]) -> Result<FuchsianSystem> {
    let m = sys.m();
    if shifts.len() != m - 1 {
        return Err(Error::Shape(format!("{} shifts for {} finite poles", shifts.len(), m - 1)));
    }
    let mut out = sys.clone();
    let total: i64 = shifts.iter().sum();
    for (i, &c) in shifts.iter().enumerate() {
        out.shift_residue(i, &CQ::from_i64(c));
    }
    out.shift_residue(m - 1, &CQ::from_i64(-total));
    if shifts.iter().any(|&c| c != 0) {
        out.normalization = Normalization::General;
    }
    Ok(out)
}

/// `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Copy, Debug)]
struct Mobius {
    a: C64,
    b: C64,
    c: C64,
    d: C64,
    /// Index of the finite pole where the map has its pole, if any.
    pole: Option<usize>,
}

impl Mobius {
    fn eval(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    fn derivative(&self, z: C64) -> C64 {
        let den = self.c * z + self.d;
        (self.a * self.d - self.b * self.c) / (den * den)
    }
}

/// One copy of an eigenvalue: residue index and position in its spectrum.
pub type Copy = (usize, usize);

const BALANCE_ITERS: usize = 25;
const POLISH_ITERS: usize = 3;
/// Orbit tolerance for intermediate steps; each step is polished back
/// onto the exact orbits before the next one.
const STEP_TOL: f64 = 1e-6;

/// Orthonormal basis of the (left or right) eigenspace containing the given
/// eigenvalue copy.
fn eigenspace(sys: &FuchsianSystem, r: usize, copy: usize, left: bool) -> Result<CMat> {
    let n = sys.n();
    let xi = &sys.spectra[r][copy];
    let mult = sys.spectra[r].iter().filter(|e| *e == xi).count();
    let a = &sys.residues[r];
    let mut shifted = a - linalg::scalar(n, xi.to_c64());
    if left {
        shifted = shifted.adjoint();
    }
    let (basis, s) = linalg::null_space(&shifted, mult);
    if s > 1e-6 * linalg::max_abs(a).max(1.0) {
        return Err(Error::Degenerate(format!(
            "{} is not a semisimple eigenvalue of residue {} (residual {s:.3e})",
            xi.to_c64(),
            r + 1
        )));
    }
    Ok(basis)
}

/// Eigenvalue copies at one pole, moved together by one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopySet {
    pub pole: usize,
    pub copies: Vec<usize>,
}

impl CopySet {
    pub fn single(c: Copy) -> Self {
        CopySet { pole: c.0, copies: vec![c.1] }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }
}

/// Orthonormal basis spanning the eigenvectors of a set made of whole
/// eigenvalue classes.
fn class_space(sys: &FuchsianSystem, set: &CopySet, left: bool) -> Result<CMat> {
    let spec = &sys.spectra[set.pole];
    let mut reps: Vec<usize> = Vec::new();
    for &c in &set.copies {
        let class = spec.iter().filter(|e| **e == spec[c]).count();
        let chosen = set.copies.iter().filter(|&&d| spec[d] == spec[c]).count();
        if class != chosen {
            return Err(Error::Input(format!(
                "copies of residue {} split the class of {}",
                set.pole + 1,
                spec[c].to_c64()
            )));
        }
        if !reps.iter().any(|&r| spec[r] == spec[c]) {
            reps.push(c);
        }
    }
    let blocks = reps
        .iter()
        .map(|&r| eigenspace(sys, set.pole, r, left))
        .collect::<Result<Vec<_>>>()?;
    let cols: Vec<_> = blocks.iter().flat_map(|b| b.column_iter().map(|c| c.into_owned())).collect();
    Ok(CMat::from_columns(&cols).qr().q())
}

/// The idempotent `Pi` of a step and the smallest cosine between the two
/// eigenvector spaces it pairs.
fn step_projector(sys: &FuchsianSystem, up: &CopySet, down: &CopySet) -> Result<(CMat, f64)> {
    if up.len() == 1 && down.len() == 1 {
        let (w, v, wv) = linalg::best_pairing(
            &eigenspace(sys, down.pole, down.copies[0], true)?,
            &eigenspace(sys, up.pole, up.copies[0], false)?,
        );
        let pi = linalg::column(&v) * linalg::column(&w).adjoint() / wv;
        return Ok((pi, wv.norm()));
    }
    let v = class_space(sys, up, false)?;
    let w = class_space(sys, down, true)?;
    let pairing = w.adjoint() * &v;
    let s = linalg::singular_values(&pairing);
    let quality = s.last().copied().unwrap_or(0.0);
    let inv = pairing
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("eigenvector pairing is singular".into()))?;
    Ok((&v * inv * w.adjoint(), quality))
}

/// `|w* v|` (smallest principal cosine for block moves) of the step a
/// gauge transformation would use. Small values mean an ill-conditioned
/// transformation.
pub fn pairing_quality(sys: &FuchsianSystem, up: &CopySet, down: &CopySet) -> Result<f64> {
    Ok(step_projector(sys, up, down)?.1)
}

/// Gauge transformation by `(1 - Pi) + phi(z) Pi` raising the eigenvalue
/// copy `up` by one and lowering `down` by one.
pub fn schlesinger_step(sys: &FuchsianSystem, up: Copy, down: Copy, tol: f64) -> Result<FuchsianSystem> {
    schlesinger_block(sys, &CopySet::single(up), &CopySet::single(down), tol)
}

/// Raise every copy in `up` and lower every copy in `down` by one, with a
/// projector of rank `up.len()`. Sets of more than one copy must consist of
/// whole eigenvalue classes.
pub fn schlesinger_block(sys: &FuchsianSystem, up: &CopySet, down: &CopySet, tol: f64) -> Result<FuchsianSystem> {
    let m = sys.m();
    let n = sys.n();
    let inf = m - 1;
    let (i, j) = (up.pole, down.pole);
    if i >= m || j >= m || up.copies.iter().chain(&down.copies).any(|&c| c >= n) {
        return Err(Error::Input("eigenvalue copy out of range".into()));
    }
    if i == j {
        return Err(Error::Input("a step needs two different poles".into()));
    }
    if up.len() != down.len() || up.is_empty() {
        return Err(Error::Input("a step moves equally many copies up and down".into()));
    }
    let eye = linalg::identity(n);
    let (pi, quality) = step_projector(sys, up, down)?;
    if quality < 1e-8 {
        return Err(Error::Degenerate("eigenvector pairing vanishes".into()));
    }
    let co = &eye - &pi;

    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let pole = |p: usize| sys.poles[p];
    let phi = match (i == inf, j == inf) {
        (false, false) => Mobius { a: one, b: -pole(i), c: one, d: -pole(j), pole: Some(j) },
        (false, true) => Mobius { a: one, b: -pole(i), c: zero, d: one, pole: None },
        (true, false) => Mobius { a: zero, b: one, c: one, d: -pole(j), pole: Some(j) },
        (true, true) => unreachable!("i != j"),
    };
    let phi_inv = Mobius {
        a: phi.c,
        b: phi.d,
        c: phi.a,
        d: phi.b,
        pole: if i == inf { None } else { Some(i) },
    };

    let scale = sys.residues.iter().map(|a| a.norm()).sum::<f64>().max(1.0) * pi.norm().max(1.0);
    let mut res = vec![CMat::zeros(n, n); inf];
    let mut constant = CMat::zeros(n, n);
    // psi(z) M / (z - a_t) split into simple fractions
    let add = |res: &mut Vec<CMat>, constant: &mut CMat, mat: CMat, psi: &Mobius, t: usize| -> Result<()> {
        let at = pole(t);
        if psi.c == zero {
            res[t] += &mat * psi.eval(at);
            *constant += &mat * (psi.a / psi.d);
            return Ok(());
        }
        let p = psi.pole.expect("finite pole");
        if p == t {
            if mat.norm() > tol * scale {
                return Err(Error::Degenerate("gauge transform leaves a double pole".into()));
            }
            res[t] += &mat * (psi.a / psi.c);
            return Ok(());
        }
        let ap = pole(p);
        let r = (psi.a * ap + psi.b) / psi.c;
        res[t] += &mat * psi.eval(at);
        res[p] += &mat * (r / (ap - at));
        Ok(())
    };
    for t in 0..inf {
        let a = &sys.residues[t];
        res[t] += &co * a * &co + &pi * a * &pi;
        add(&mut res, &mut constant, &co * a * &pi, &phi_inv, t)?;
        add(&mut res, &mut constant, &pi * a * &co, &phi, t)?;
    }
    if i != inf {
        res[i] += &pi;
    }
    if j != inf {
        res[j] -= &pi;
    }
    if constant.norm() > tol * scale {
        return Err(Error::Degenerate("gauge transform leaves a polynomial part".into()));
    }

    // compare with G A G^-1 + G' G^-1 at a few points
    let g_at = |z: C64| (&co + &pi * phi.eval(z), &co + &pi / phi.eval(z));
    for z in [C64::new(0.37, 0.81), C64::new(-1.3, 0.2), C64::new(2.1, -0.7)] {
        let a_z = (0..inf).fold(CMat::zeros(n, n), |acc, t| acc + &sys.residues[t] / (z - pole(t)));
        let (g, g_inv) = g_at(z);
        let size = g.norm() * a_z.norm() * g_inv.norm();
        let direct = &g * a_z * &g_inv + &pi * (phi.derivative(z) / phi.eval(z));
        let fractions = (0..inf).fold(CMat::zeros(n, n), |acc, t| acc + &res[t] / (z - pole(t)));
        let err = (direct - &fractions).norm() / (size + fractions.norm()).max(1.0);
        if err > tol {
            return Err(Error::Degenerate(format!("gauge transform check failed at {z}: {err:.3e}")));
        }
    }

    let mut out = sys.clone();
    let finite = res.iter().fold(CMat::zeros(n, n), |acc, r| acc + r);
    res.push(linalg::scalar(n, sys.nu.to_c64()) - finite);
    out.residues = res;
    for &k in &up.copies {
        out.spectra[i][k] = out.spectra[i][k].clone() + CQ::from_i64(1);
    }
    for &l in &down.copies {
        out.spectra[j][l] = out.spectra[j][l].clone() - CQ::from_i64(1);
    }
    out.normalization = Normalization::General;
    // the gauge output is far from normal; check orbits on a balanced basis
    let out = out.balanced(BALANCE_ITERS);
    let errors = out.orbit_errors();
    if let Some((r, e)) = errors.iter().enumerate().find(|(_, e)| **e > tol) {
        return Err(Error::Degenerate(format!("residue {} misses its orbit after the step: {e:.3e}", r + 1)));
    }
    Ok(out)
}

pub(crate) fn check_translation(ty: AffineType, mu: &[i64]) -> Result<()> {
    let g = ty.graph();
    if mu.len() != g.num_nodes() {
        return Err(Error::Shape(format!("translation has {} entries, {ty} has {} nodes", mu.len(), g.num_nodes())));
    }
    let delta = g.delta().expect("affine");
    let lvl: i64 = delta.0.iter().zip(mu).map(|(a, b)| a * b).sum();
    if lvl != 0 {
        return Err(Error::Input(format!("translation has level {lvl}, expected 0")));
    }
    Ok(())
}

/// Target spectra after translating the parameters by `mu`, keeping `nu` and
/// the slot-0 values at the finite poles.
fn translated_spectra(sys: &FuchsianSystem, mu: &[i64]) -> Result<Vec<Vec<CQ>>> {
    let lambda = sys.params()?;
    let target = lambda.add_scaled_int(mu, 1);
    let mut spectra = FuchsianSystem::predicted_spectra(sys.ty, &target);
    let m = sys.m();
    for (i, spec) in spectra.iter_mut().enumerate() {
        let mut off = sys.spectra[i][0].clone();
        if i == m - 1 {
            off = off - CQ::from_i64(mu[0]);
        }
        for e in spec.iter_mut() {
            *e = e.clone() + off.clone();
        }
    }
    Ok(spectra)
}

/// Number-of-steps estimate: pair unit moves in order, routing through a
/// hub when only same-pole partners are left.
fn plan(ups: &[Copy], downs: &[Copy], hub_for: impl Fn(usize) -> usize) -> Vec<(Copy, Copy)> {
    let mut downs: Vec<Option<Copy>> = downs.iter().copied().map(Some).collect();
    let mut steps = Vec::new();
    for &u in ups {
        if let Some(slot) = downs.iter_mut().find(|d| d.is_some_and(|d| d.0 != u.0)) {
            steps.push((u, slot.take().expect("present")));
            continue;
        }
        let slot = downs.iter_mut().find(|d| d.is_some()).expect("balanced moves");
        let d = slot.take().expect("present");
        let hub = (hub_for(u.0), 0);
        steps.push((u, hub));
        steps.push((hub, d));
    }
    steps
}

/// Integer differences `target - current`, per copy.
fn integer_moves(sys: &FuchsianSystem, target: &[Vec<CQ>]) -> Result<Vec<Vec<i64>>> {
    sys.spectra
        .iter()
        .zip(target)
        .map(|(cur, tgt)| {
            cur.iter()
                .zip(tgt)
                .map(|(c, t)| {
                    let d = t.clone() - c.clone();
                    if !d.is_integral() {
                        return Err(Error::Input("translation does not move eigenvalues by integers".into()));
                    }
                    num_traits::ToPrimitive::to_i64(&d.re.to_integer())
                        .ok_or_else(|| Error::Input("translation too large".into()))
                })
                .collect()
        })
        .collect()
}

fn unit_moves(moves: &[Vec<i64>]) -> (Vec<Copy>, Vec<Copy>) {
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    for (i, row) in moves.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            let list = if d > 0 { &mut ups } else { &mut downs };
            list.extend(std::iter::repeat_n((i, k), d.unsigned_abs() as usize));
        }
    }
    (ups, downs)
}

/// Moves after a tensor shift by `c` at the finite poles.
fn shifted_moves(moves: &[Vec<i64>], c: &[i64]) -> Vec<Vec<i64>> {
    let inf = moves.len() - 1;
    let total: i64 = c.iter().sum();
    moves
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let s = if i == inf { -total } else { c[i] };
            row.iter().map(|d| d + s).collect()
        })
        .collect()
}

/// Tensor shifts (which leave the parameters alone) ordered by the number
/// of gauge steps they need; the first `keep` are returned.
fn best_offsets(moves: &[Vec<i64>], hub_for: &impl Fn(usize) -> usize, keep: usize) -> Vec<Vec<i64>> {
    let finite = moves.len() - 1;
    let radius = moves.iter().flatten().map(|d| d.abs()).max().unwrap_or(0) + 1;
    let mut all: Vec<(usize, i64, Vec<i64>)> = Vec::new();
    let mut c = vec![-radius; finite];
    loop {
        let (ups, downs) = unit_moves(&shifted_moves(moves, &c));
        let cost = plan(&ups, &downs, hub_for).len();
        let size: i64 = c.iter().map(|v| v.abs()).sum();
        all.push((cost, size, c.clone()));
        let mut pos = 0;
        while pos < finite && c[pos] == radius {
            c[pos] = -radius;
            pos += 1;
        }
        if pos == finite {
            break;
        }
        c[pos] += 1;
    }
    all.sort();
    all.into_iter().take(keep).map(|(_, _, c)| c).collect()
}

/// Below this pairing a detour through a third pole is considered.
const DETOUR_QUALITY: f64 = 0.25;
/// Retry thresholds: below this a detour is taken even while another one
/// is pending. The strict first pass never does so.
const HOPELESS_QUALITY: [f64; 2] = [0.0, 1e-2];
/// Number of tensor offsets tried before giving up.
const OFFSET_CANDIDATES: usize = 8;

/// One representative copy per (pole, eigenvalue) among copies whose
/// remaining move has the requested sign (`0` selects every copy).
fn representatives(sys: &FuchsianSystem, net: &[Vec<i64>], sign: i64) -> Vec<Copy> {
    let mut out: Vec<Copy> = Vec::new();
    for (i, row) in net.iter().enumerate() {
        for (k, &d) in row.iter().enumerate() {
            if sign != 0 && d.signum() != sign {
                continue;
            }
            if !out.iter().any(|&(p, c)| p == i && sys.spectra[p][c] == sys.spectra[i][k]) {
                out.push((i, k));
            }
        }
    }
    out
}

/// Whether moving copy `c` by `by` lands on another eigenvalue of the same
/// residue, which risks a Jordan block.
fn collides(sys: &FuchsianSystem, c: Copy, by: i64) -> bool {
    let spec = &sys.spectra[c.0];
    let moved = spec[c.1].clone() + CQ::from_i64(by);
    spec.iter().any(|e| *e == moved)
}

fn best_step(sys: &FuchsianSystem, pairs: impl Iterator<Item = (Copy, Copy)>) -> Result<Option<(f64, Copy, Copy)>> {
    let mut best: Option<(bool, f64, Copy, Copy)> = None;
    for (u, d) in pairs {
        if u.0 == d.0 {
            continue;
        }
        let clean = !collides(sys, u, 1) && !collides(sys, d, -1);
        let q = pairing_quality(sys, &CopySet::single(u), &CopySet::single(d))?;
        if best.is_none_or(|(bc, bq, _, _)| (clean, q) > (bc, bq)) {
            best = Some((clean, q, u, d));
        }
    }
    Ok(best.map(|(_, q, u, d)| (q, u, d)))
}

/// Run the remaining moves greedily, always taking the best conditioned
/// step; when every direct pairing is poor, a copy at a third pole may be
/// lowered (or raised) temporarily.
fn run_moves(sys: &FuchsianSystem, mut net: Vec<Vec<i64>>, hopeless_below: f64, tol: f64) -> Result<FuchsianSystem> {
    let total: i64 = net.iter().flatten().filter(|d| **d > 0).sum();
    let budget = 4 * total as usize + 16;
    let step_tol = tol.max(STEP_TOL);
    let mut cur = sys.balanced(BALANCE_ITERS);
    // copy temporarily moved by a detour, still to be restored
    let mut detour: Option<Copy> = None;
    let mut last: Option<(Copy, Copy)> = None;
    for _ in 0..budget {
        let ups = representatives(&cur, &net, 1);
        let downs = representatives(&cur, &net, -1);
        if ups.is_empty() {
            return Ok(cur);
        }
        let not_undo = |u: Copy, d: Copy| last != Some((d, u));
        let direct = best_step(
            &cur,
            ups.iter()
                .flat_map(|&u| downs.iter().map(move |&d| (u, d)))
                .filter(|&(u, d)| not_undo(u, d)),
        )?;
        let mut choice = direct;
        let mut detoured = None;
        let poor = direct.is_none_or(|(q, _, _)| q < DETOUR_QUALITY);
        let hopeless = direct.is_none_or(|(q, _, _)| q < hopeless_below);
        if hopeless || (detour.is_none() && poor) {
            let idle: Vec<Copy> = representatives(&cur, &net, 0)
                .into_iter()
                .filter(|&(p, c)| net[p][c] == 0)
                .collect();
            let lower = best_step(&cur, ups.iter().flat_map(|&u| idle.iter().map(move |&h| (u, h))))?;
            let raise = best_step(&cur, idle.iter().flat_map(|&h| downs.iter().map(move |&d| (h, d))))?;
            for (cand, via) in [(lower, lower.map(|c| c.2)), (raise, raise.map(|c| c.1))] {
                if let Some(cand) = cand {
                    if choice.is_none_or(|(q, _, _)| cand.0 > 2.0 * q) {
                        choice = Some(cand);
                        detoured = via;
                    }
                }
            }
        }
        let (_, u, d) = choice.ok_or_else(|| Error::Degenerate("no admissible Schlesinger step".into()))?;
        cur = schlesinger_step(&cur, u, d, step_tol)?.polished(POLISH_ITERS);
        net[u.0][u.1] -= 1;
        net[d.0][d.1] += 1;
        if detoured.is_some() {
            detour = detoured;
        } else if detour.is_some_and(|h| net[h.0][h.1] == 0) {
            detour = None;
        }
        last = Some((u, d));
    }
    Err(Error::Degenerate("translation planner did not terminate".into()))
}

/// Translate the parameters by the integral level-zero vector `mu`.
///
/// Eigenvalues move by integers through Schlesinger steps; the slot-0
/// values at the finite poles are kept, `nu` is unchanged. Between steps
/// the system is conjugated towards minimal norm.
pub fn translate(sys: &FuchsianSystem, mu: &[i64], tol: f64) -> Result<FuchsianSystem> {
    check_translation(sys.ty, mu)?;
    if mu.iter().all(|&v| v == 0) {
        return Ok(sys.clone());
    }
    let target = translated_spectra(sys, mu)?;
    let moves = integer_moves(sys, &target)?;
    let m = sys.m();
    let hub_for = |pole: usize| if pole == m - 1 { 0 } else { m - 1 };
    let mut failure = None;
    for offsets in best_offsets(&moves, &hub_for, OFFSET_CANDIDATES) {
        let net = shifted_moves(&moves, &offsets);
        for hopeless in HOPELESS_QUALITY {
            let attempt = run_moves(sys, net.clone(), hopeless, tol)
                .and_then(|cur| finish_translation(&cur, &offsets, &target, tol));
            match attempt {
                Ok(out) => return Ok(out),
                Err(e) if e.is_degeneracy() => failure = Some(e),
                Err(e) => return Err(e),
            }
        }
    }
    Err(failure.expect("at least one planner pass"))
}

fn finish_translation(cur: &FuchsianSystem, offsets: &[i64], target: &[Vec<CQ>], tol: f64) -> Result<FuchsianSystem> {
    let undo: Vec<i64> = offsets.iter().map(|c| -c).collect();
    let mut out = tensor_shift(cur, &undo)?;
    out.normalization = Normalization::General;
    debug_assert_eq!(out.spectra, target);
    out.check(tol)?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct OrbitRow {
    pub step: usize,
    pub lambda: ParamVector<CQ>,
    pub signature: Vec<C64>,
}

/// Iterate `translate` by `mu`, recording the parameters and the signature
/// (words of length up to `sig_len`) after every step.
pub fn dp_orbit(sys: &FuchsianSystem, mu: &[i64], steps: usize, sig_len: usize, tol: f64) -> Result<Vec<OrbitRow>> {
    check_translation(sys.ty, mu)?;
    let mut cur = sys.clone();
    let mut rows = Vec::with_capacity(steps + 1);
    for step in 0..=steps {
        if step > 0 {
            cur = translate(&cur, mu, tol)?;
        }
        rows.push(OrbitRow {
            step,
            lambda: cur.params()?,
            signature: cur.signature(sig_len),
        });
    }
    Ok(rows)
}

/// Relabel legs of equal length (experimental; the leg at infinity stays
/// put). `perm[k]` is the new position of leg `k`.
pub fn relabel(sys: &FuchsianSystem, perm: &[usize]) -> Result<FuchsianSystem> {
    let m = sys.m();
    if perm.len() != m || perm[m - 1] != m - 1 {
        return Err(Error::Input("relabelling must fix the leg at infinity".into()));
    }
    permute_legs(&sys.graph(), perm, &ParamVector::<CQ>::zeros(sys.graph().num_nodes()))?;
    let mut out = sys.clone();
    for (k, &p) in perm.iter().enumerate() {
        out.residues[p] = sys.residues[k].clone();
        out.spectra[p] = sys.spectra[k].clone();
        if k < m - 1 {
            out.poles[p] = sys.poles[k];
        }
    }
    Ok(out)
}

/// One generator in a word acting on systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum WeylOp {
    Leg { node: usize },
    Central,
    Tensor { shift: Vec<i64> },
    Translate { mu: Vec<i64> },
    Relabel { perm: Vec<usize> },
}

/// Operations applied in list order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeylWord(pub Vec<WeylOp>);

impl WeylWord {
    pub fn apply(&self, sys: &FuchsianSystem, tol: f64) -> Result<FuchsianSystem> {
        let mut cur = sys.clone();
        for op in &self.0 {
            cur = match op {
                WeylOp::Leg { node } => leg_reflection(&cur, *node)?,
                WeylOp::Central => central_reflection(&cur, tol)?,
                WeylOp::Tensor { shift } => tensor_shift(&cur, shift)?,
                WeylOp::Translate { mu } => translate(&cur, mu, tol)?,
                WeylOp::Relabel { perm } => relabel(&cur, perm)?,
            };
        }
        Ok(cur)
    }

    /// The exact effect on parameters.
    pub fn apply_params(&self, ty: AffineType, lambda: &ParamVector<CQ>) -> Result<ParamVector<CQ>> {
        let g = ty.graph();
        let c = cartan_matrix(&g);
        let mut cur = lambda.clone();
        for op in &self.0 {
            cur = match op {
                WeylOp::Leg { node } => {
                    if *node == 0 || *node >= g.num_nodes() {
                        return Err(Error::Input(format!("node {node} is not on a leg")));
                    }
                    apply_word(&c, &[*node], &cur)
                }
                WeylOp::Central => apply_word(&c, &[0], &cur),
                WeylOp::Tensor { .. } => cur,
                WeylOp::Translate { mu } => {
                    check_translation(ty, mu)?;
                    cur.add_scaled_int(mu, 1)
                }
                WeylOp::Relabel { perm } => permute_legs(&g, perm, &cur)?,
            };
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynkin::{reflect_param, weight_lattice_basis};
    use crate::fuchsian::{sample_system, signature_distance, DEFAULT_TOL};

    const TOL: f64 = 1e-8;

    #[test]
    fn lift_reproduces_the_sum() {
        for ty in AffineType::ALL {
            let (sys, _) = sample_system(ty, 21).unwrap();
            let pair = lift(&sys).unwrap();
            assert_eq!(pair.big_n(), sys.n() + 1);
            pair.check(1e-9).unwrap();
            let qp = pair.qp();
            let n = sys.n();
            let sum = (0..sys.m() - 1).fold(CMat::zeros(n, n), |acc, i| acc + &sys.residues[i]);
            assert!(linalg::max_abs(&(qp.view((0, 0), (n, n)) - sum)) < 1e-10);
        }
    }

    #[test]
    fn lift_rejects_zero_residues() {
        let (mut sys, _) = sample_system(AffineType::D4, 2).unwrap();
        sys.residues[0] = CMat::zeros(2, 2);
        assert!(lift(&sys).is_err());
    }

    #[test]
    fn shift_moves_b_spectrum() {
        let (sys, _) = sample_system(AffineType::E6, 5).unwrap();
        let pair = lift(&sys).unwrap();
        let lam = CQ::new(crate::scalar::q(2, 3), crate::scalar::q(-1, 5));
        let shifted = pair.scalar_shift(&lam);
        shifted.check(1e-9).unwrap();
        assert_eq!(shifted.params, pair.quiver.shift_params(&pair.params, &lam));
        let zero = pair.scalar_shift(&CQ::from_i64(0));
        let a: Vec<C64> = pair.block_residues().iter().map(|r| r.trace()).collect();
        let b: Vec<C64> = zero.block_residues().iter().map(|r| r.trace()).collect();
        assert!(signature_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn projection_round_trip() {
        for ty in AffineType::ALL {
            let (sys, _) = sample_system(ty, 31).unwrap();
            let nu = sys.nu.clone();
            let pair = lift(&sys).unwrap().scalar_shift(&nu).scalar_shift(&-nu);
            let back = pair.project(TOL).unwrap();
            assert_eq!(back.spectra, sys.spectra);
            assert!(signature_distance(&sys.signature(4), &back.signature(4)) < 1e-8, "{ty}");
        }
    }

    #[test]
    fn projection_needs_zero_center() {
        let (sys, _) = sample_system(AffineType::E7, 1).unwrap();
        let pair = lift(&sys).unwrap().scalar_shift(&CQ::from_i64(1));
        assert!(matches!(pair.project(TOL), Err(Error::Input(_))));
    }

    #[test]
    fn central_reflection_is_an_involution() {
        for ty in AffineType::ALL {
            let (sys, lambda) = sample_system(ty, 77).unwrap();
            let once = central_reflection(&sys, TOL).unwrap();
            let c = cartan_matrix(&ty.graph());
            assert_eq!(once.params().unwrap(), reflect_param(&c, 0, &lambda));
            let twice = central_reflection(&once, TOL).unwrap();
            assert_eq!(twice.params().unwrap(), lambda);
            assert!(signature_distance(&sys.signature(4), &twice.signature(4)) < 1e-6, "{ty}");
            assert!(signature_distance(&sys.signature(4), &once.signature(4)) > 1e-3);
        }
    }

    #[test]
    fn central_reflection_needs_nonzero_nu() {
        let (mut sys, _) = sample_system(AffineType::E6, 1).unwrap();
        sys.nu = CQ::from_i64(0);
        assert!(matches!(central_reflection(&sys, TOL), Err(Error::Wall(_))));
    }

    #[test]
    fn leg_reflections() {
        let (sys, lambda) = sample_system(AffineType::E8, 4).unwrap();
        let g = sys.graph();
        let c = cartan_matrix(&g);
        for node in 1..g.num_nodes() {
            let r = leg_reflection(&sys, node).unwrap();
            assert_eq!(r.params().unwrap(), reflect_param(&c, node, &lambda));
            r.check(1e-9).unwrap();
            let (_, depth) = g.position(node).unwrap();
            if depth >= 2 {
                assert_eq!(r.residues, sys.residues);
            }
            let back = leg_reflection(&r, node).unwrap();
            assert_eq!(back.spectra, sys.spectra);
            assert_eq!(back.nu, sys.nu);
            for (a, b) in back.residues.iter().zip(&sys.residues) {
                assert!(linalg::max_abs(&(a - b)) < 1e-12);
            }
        }
        assert!(leg_reflection(&sys, 0).is_err());
    }

    #[test]
    fn tensor_shift_of_pvi() {
        let (sys, lambda) = sample_system(AffineType::D4, 6).unwrap();
        let t = tensor_shift(&sys, &[1, 0, 0]).unwrap();
        let theta1 = sys.spectra[0][1].clone();
        assert_eq!(t.spectra[0], vec![CQ::from_i64(1), theta1 + CQ::from_i64(1)]);
        assert_eq!(t.params().unwrap(), lambda);
        t.check(1e-9).unwrap();
        let zero = tensor_shift(&sys, &[0, 0, 0]).unwrap();
        assert_eq!(zero.residues, sys.residues);
    }

    #[test]
    fn schlesinger_round_trip() {
        for ty in AffineType::ALL {
            let (sys, _) = sample_system(ty, 13).unwrap();
            let inf = sys.m() - 1;
            let fwd = schlesinger_step(&sys, (0, 0), (inf, 1), TOL).unwrap();
            let tr_before = sys.residues[0].trace();
            assert!((fwd.residues[0].trace() - tr_before - C64::new(1.0, 0.0)).norm() < 1e-9);
            let back = schlesinger_step(&fwd, (inf, 1), (0, 0), TOL).unwrap();
            assert_eq!(back.spectra, sys.spectra);
            assert!(signature_distance(&sys.signature(4), &back.signature(4)) < 1e-8, "{ty}");
            let fin = schlesinger_step(&sys, (1, 0), (0, sys.n() - 1), TOL).unwrap();
            let fin_back = schlesinger_step(&fin, (0, sys.n() - 1), (1, 0), TOL).unwrap();
            assert!(signature_distance(&sys.signature(4), &fin_back.signature(4)) < 1e-8, "{ty}");
        }
    }

    #[test]
    fn translations_by_lattice_basis() {
        for ty in AffineType::ALL {
            let (sys, lambda) = sample_system(ty, 17).unwrap();
            for mu in weight_lattice_basis(&ty.graph()).into_iter().take(5) {
                let out = translate(&sys, &mu, TOL).unwrap();
                assert_eq!(out.params().unwrap(), lambda.add_scaled_int(&mu, 1));
                out.check(TOL).unwrap();
            }
        }
    }

    #[test]
    fn translation_rejects_bad_vectors() {
        let (sys, _) = sample_system(AffineType::D4, 1).unwrap();
        assert!(matches!(translate(&sys, &[1, 0, 0, 0, 0], TOL), Err(Error::Input(_))));
        assert!(matches!(translate(&sys, &[1, 0], TOL), Err(Error::Shape(_))));
        let same = translate(&sys, &[0; 5], TOL).unwrap();
        assert_eq!(same.residues, sys.residues);
    }

    #[test]
    fn word_json_round_trip() {
        let w = WeylWord(vec![
            WeylOp::Leg { node: 2 },
            WeylOp::Central,
            WeylOp::Tensor { shift: vec![1, 0] },
            WeylOp::Translate { mu: vec![1, 0, 0, 0, 0, 0, -3] },
        ]);
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.starts_with(r#"[{"op":"leg","node":2},{"op":"central"}"#));
        assert_eq!(serde_json::from_str::<WeylWord>(&s).unwrap(), w);
    }

    #[test]
    fn word_effect_matches_parameters() {
        let (sys, lambda) = sample_system(AffineType::E6, 8).unwrap();
        let w = WeylWord(vec![WeylOp::Central, WeylOp::Leg { node: 1 }, WeylOp::Central]);
        let out = w.apply(&sys, TOL).unwrap();
        assert_eq!(out.params().unwrap(), w.apply_params(AffineType::E6, &lambda).unwrap());
        out.check(DEFAULT_TOL.max(TOL)).unwrap();
    }

    #[test]
    fn relabel_swaps_equal_legs() {
        let (sys, lambda) = sample_system(AffineType::E6, 3).unwrap();
        let r = relabel(&sys, &[1, 0, 2]).unwrap();
        assert_eq!(r.poles, vec![sys.poles[1], sys.poles[0]]);
        let word = WeylWord(vec![WeylOp::Relabel { perm: vec![1, 0, 2] }]);
        assert_eq!(r.params().unwrap(), word.apply_params(AffineType::E6, &lambda).unwrap());
        assert!(relabel(&sys, &[0, 2, 1]).is_err());
    }
}
