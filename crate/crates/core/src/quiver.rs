//! Star quivers: dimension vectors, representations and the moment map, and
//! the parameter calculus on incremented quivers.

use rand::Rng;

use crate::dynkin::{cartan_matrix, reflect_param, AffineType, ParamVector, StarGraph};
use crate::error::{Error, Result};
use crate::exact::Mat;
use crate::scalar::{Scalar, C64};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimensionVector(pub Vec<usize>);

impl DimensionVector {
    pub fn center(&self) -> usize {
        self.0[0]
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&v| v as i64).collect()
    }

    pub fn dot<F: Scalar>(&self, lambda: &ParamVector<F>) -> F {
        self.0
            .iter()
            .zip(&lambda.0)
            .fold(F::zero(), |acc, (&n, l)| acc + F::from_i64(n as i64) * l.clone())
    }

    /// The null root of an affine star graph.
    pub fn delta(ty: AffineType) -> Self {
        let d = ty.graph().delta().expect("affine");
        DimensionVector(d.0.iter().map(|&v| v as usize).collect())
    }

    /// Dimensions down one leg, starting with the node next to the center.
    pub fn leg(&self, g: &StarGraph, leg: usize) -> Vec<usize> {
        g.leg_nodes(leg).map(|i| self.0[i]).collect()
    }
}

/// Linear maps on the doubled quiver: `phi[e]: W_t -> W_h` and
/// `phi_star[e]: W_h -> W_t` for every edge `e = (t, h)` of
/// [`StarGraph::edges`] (all edges point towards the center).
#[derive(Clone, Debug, PartialEq)]
pub struct QuiverRep<F> {
    pub graph: StarGraph,
    pub dims: DimensionVector,
    pub phi: Vec<Mat<F>>,
    pub phi_star: Vec<Mat<F>>,
}

impl<F: Scalar> QuiverRep<F> {
    pub fn new(graph: StarGraph, dims: DimensionVector, phi: Vec<Mat<F>>, phi_star: Vec<Mat<F>>) -> Result<Self> {
        let rep = Self {
            graph,
            dims,
            phi,
            phi_star,
        };
        rep.check_shapes()?;
        Ok(rep)
    }

    pub fn zero(graph: StarGraph, dims: DimensionVector) -> Self {
        let edges = graph.edges();
        let phi = edges
            .iter()
            .map(|&(t, h)| Mat::zeros(dims.0[h], dims.0[t]))
            .collect();
        let phi_star = edges
            .iter()
            .map(|&(t, h)| Mat::zeros(dims.0[t], dims.0[h]))
            .collect();
        Self {
            graph,
            dims,
            phi,
            phi_star,
        }
    }

    fn check_shapes(&self) -> Result<()> {
        let n = self.graph.num_nodes();
        if self.dims.0.len() != n {
            return Err(Error::Shape(format!("{} dimensions for {n} nodes", self.dims.0.len())));
        }
        let edges = self.graph.edges();
        if self.phi.len() != edges.len() || self.phi_star.len() != edges.len() {
            return Err(Error::Shape("one map per edge and direction expected".into()));
        }
        for (e, &(t, h)) in edges.iter().enumerate() {
            let (dt, dh) = (self.dims.0[t], self.dims.0[h]);
            if (self.phi[e].rows(), self.phi[e].cols()) != (dh, dt)
                || (self.phi_star[e].rows(), self.phi_star[e].cols()) != (dt, dh)
            {
                return Err(Error::Shape(format!("edge {t}->{h} expects {dh}x{dt} and {dt}x{dh}")));
            }
        }
        Ok(())
    }

    /// `mu_i = sum_{h(e)=i} phi_e phi_e* - sum_{t(e)=i} phi_e* phi_e`.
    pub fn moment_map(&self) -> Vec<Mat<F>> {
        let mut mu: Vec<Mat<F>> = self.dims.0.iter().map(|&d| Mat::zeros(d, d)).collect();
        for (e, (t, h)) in self.graph.edges().into_iter().enumerate() {
            mu[h] = mu[h].add(&self.phi[e].mul(&self.phi_star[e]));
            mu[t] = mu[t].sub(&self.phi_star[e].mul(&self.phi[e]));
        }
        mu
    }

    /// Change of basis `g_i` at every node.
    pub fn conjugate(&self, g: &[Mat<F>], g_inv: &[Mat<F>]) -> Self {
        let edges = self.graph.edges();
        let phi = edges
            .iter()
            .enumerate()
            .map(|(e, &(t, h))| g[h].mul(&self.phi[e]).mul(&g_inv[t]))
            .collect();
        let phi_star = edges
            .iter()
            .enumerate()
            .map(|(e, &(t, h))| g[t].mul(&self.phi_star[e]).mul(&g_inv[h]))
            .collect();
        Self {
            graph: self.graph.clone(),
            dims: self.dims.clone(),
            phi,
            phi_star,
        }
    }
}

impl QuiverRep<C64> {
    /// Entries drawn independently from the unit square.
    pub fn random<R: Rng>(graph: StarGraph, dims: DimensionVector, rng: &mut R) -> Self {
        let mut draw = |r: usize, c: usize| {
            Mat::from_fn(r, c, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        };
        let edges = graph.edges();
        let phi = edges.iter().map(|&(t, h)| draw(dims.0[h], dims.0[t])).collect();
        let phi_star = edges.iter().map(|&(t, h)| draw(dims.0[t], dims.0[h])).collect();
        Self {
            graph,
            dims,
            phi,
            phi_star,
        }
    }
}

/// `2 sum_edges n_t n_h`.
pub fn dim_w(g: &StarGraph, d: &DimensionVector) -> usize {
    2 * g.edges().iter().map(|&(t, h)| d.0[t] * d.0[h]).sum::<usize>()
}

/// Dimension of a semisimple orbit in `gl_n` with the given eigenvalue
/// multiplicities.
pub fn orbit_dimension(multiplicities: &[usize]) -> usize {
    let n: usize = multiplicities.iter().sum();
    n * n - multiplicities.iter().map(|m| m * m).sum::<usize>()
}

/// `sum dim O_i - 2 dim PGL_n`.
pub fn expected_dim(orbits: &[Vec<usize>], n: usize) -> Result<i64> {
    if let Some(bad) = orbits.iter().find(|m| m.iter().sum::<usize>() != n) {
        return Err(Error::Input(format!("multiplicities {bad:?} do not sum to {n}")));
    }
    let total: usize = orbits.iter().map(|m| orbit_dimension(m)).sum();
    Ok(total as i64 - 2 * (n * n - 1) as i64)
}

/// Star quiver with a full leg, i.e. one leg with dimensions `N-1, ..., 1`
/// where `N - 1` is the center dimension, and `sum` of dimensions adjacent to
/// the center equal to `2(N-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostAffineQuiver {
    pub graph: StarGraph,
    pub dims: DimensionVector,
    pub full_leg: usize,
}

fn strictly_decreasing_legs(g: &StarGraph, d: &DimensionVector) -> bool {
    (0..g.num_legs()).all(|leg| {
        let mut prev = d.center();
        g.leg_nodes(leg).all(|i| {
            let ok = d.0[i] > 0 && d.0[i] < prev;
            prev = d.0[i];
            ok
        })
    })
}

fn is_full(g: &StarGraph, d: &DimensionVector, leg: usize) -> bool {
    let c = d.center();
    let dims = d.leg(g, leg);
    dims.len() + 1 == c && dims.iter().enumerate().all(|(k, &v)| v == c - 1 - k)
}

pub fn is_almost_affine(g: &StarGraph, d: &DimensionVector) -> bool {
    AlmostAffineQuiver::new(g.clone(), d.clone()).is_ok()
}

impl AlmostAffineQuiver {
    /// The last full leg in canonical order is taken as the full leg.
    pub fn new(graph: StarGraph, dims: DimensionVector) -> Result<Self> {
        if dims.0.len() != graph.num_nodes() {
            return Err(Error::Shape("dimension vector length differs from node count".into()));
        }
        if !strictly_decreasing_legs(&graph, &dims) {
            return Err(Error::Input("dimensions must strictly decrease down each leg".into()));
        }
        let full_leg = (0..graph.num_legs())
            .rev()
            .find(|&l| is_full(&graph, &dims, l))
            .ok_or_else(|| Error::Input("no full leg".into()))?;
        let adjacent: usize = (0..graph.num_legs()).map(|l| dims.0[graph.node(l, 1)]).sum();
        if adjacent != 2 * dims.center() {
            return Err(Error::Input(format!(
                "dimensions next to the center sum to {adjacent}, expected {}",
                2 * dims.center()
            )));
        }
        Ok(Self {
            graph,
            dims,
            full_leg,
        })
    }

    pub fn affine(ty: AffineType) -> Self {
        Self::new(ty.graph(), DimensionVector::delta(ty)).expect("affine quivers are almost affine")
    }

    /// `N`, one more than the center dimension.
    pub fn big_n(&self) -> usize {
        self.dims.center() + 1
    }

    /// Lengthen the full leg by one node and raise its dimensions (the old
    /// center included) by one.
    pub fn increment(&self) -> IncrementedQuiver {
        let g = &self.graph;
        let n = self.big_n();
        let mut legs: Vec<usize> = g.legs().to_vec();
        legs[self.full_leg] += 1;
        let graph = StarGraph::new(legs.clone()).expect("valid legs");
        let mut dims = vec![0usize; graph.num_nodes()];
        dims[0] = n;
        let full = graph.num_legs() - 1;
        for leg in 0..g.num_legs() {
            if leg == self.full_leg {
                continue;
            }
            let target = if leg < self.full_leg { leg } else { leg - 1 };
            for (k, node) in graph.leg_nodes(target).enumerate() {
                dims[node] = self.dims.0[g.node(leg, k + 1)];
            }
        }
        for (k, node) in graph.leg_nodes(full).enumerate() {
            dims[node] = n - 1 - k;
        }
        IncrementedQuiver {
            base: self.clone(),
            graph,
            dims: DimensionVector(dims),
            full_leg: full,
        }
    }
}

/// `Q+` together with the quiver it came from. Its full leg is always the
/// last leg; the other legs keep their relative order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncrementedQuiver {
    pub base: AlmostAffineQuiver,
    pub graph: StarGraph,
    pub dims: DimensionVector,
    pub full_leg: usize,
}

impl IncrementedQuiver {
    /// Leg of `Q+` carrying the data of leg `leg` of the base quiver
    /// (`leg` different from the full leg).
    fn plus_leg(&self, leg: usize) -> usize {
        if leg < self.base.full_leg {
            leg
        } else {
            leg - 1
        }
    }

    /// Parameters on `Q+` with center 0 projecting to `lambda`.
    pub fn lift_params<F: Scalar>(&self, lambda: &ParamVector<F>) -> ParamVector<F> {
        let g = &self.base.graph;
        let mut out = ParamVector::zeros(self.graph.num_nodes());
        for leg in 0..g.num_legs() {
            if leg == self.base.full_leg {
                continue;
            }
            let pl = self.plus_leg(leg);
            for depth in 1..=g.legs()[leg] {
                out.0[self.graph.node(pl, depth)] = lambda.0[g.node(leg, depth)].clone();
            }
        }
        out.0[self.graph.node(self.full_leg, 1)] = lambda.0[0].clone();
        for depth in 1..=g.legs()[self.base.full_leg] {
            out.0[self.graph.node(self.full_leg, depth + 1)] =
                lambda.0[g.node(self.base.full_leg, depth)].clone();
        }
        out
    }

    /// Center `+Lambda`, first node of every non-full leg `-Lambda`.
    pub fn shift_params<F: Scalar>(&self, lambda: &ParamVector<F>, shift: &F) -> ParamVector<F> {
        let mut out = lambda.clone();
        out.0[0] = out.0[0].clone() + shift.clone();
        for leg in 0..self.graph.num_legs() {
            if leg != self.full_leg {
                let i = self.graph.node(leg, 1);
                out.0[i] = out.0[i].clone() - shift.clone();
            }
        }
        out
    }

    /// Shift the center to zero, drop it and contract the top of the full leg.
    pub fn project_params<F: Scalar>(&self, lambda: &ParamVector<F>) -> ParamVector<F> {
        let shifted = self.shift_params(lambda, &-lambda.0[0].clone());
        let g = &self.base.graph;
        let mut out = ParamVector::zeros(g.num_nodes());
        out.0[0] = shifted.0[self.graph.node(self.full_leg, 1)].clone();
        for leg in 0..g.num_legs() {
            if leg == self.base.full_leg {
                for depth in 1..=g.legs()[leg] {
                    out.0[g.node(leg, depth)] = shifted.0[self.graph.node(self.full_leg, depth + 1)].clone();
                }
            } else {
                let pl = self.plus_leg(leg);
                for depth in 1..=g.legs()[leg] {
                    out.0[g.node(leg, depth)] = shifted.0[self.graph.node(pl, depth)].clone();
                }
            }
        }
        out
    }

    /// Swap of the first two eigenvalues of the full-leg orbit:
    /// `l1 -> l1 + l2, l2 -> -l2, l3 -> l2 + l3` along center, first and
    /// second full-leg nodes.
    pub fn permute_params<F: Scalar>(&self, lambda: &ParamVector<F>) -> ParamVector<F> {
        let i1 = 0;
        let i2 = self.graph.node(self.full_leg, 1);
        let l2 = lambda.0[i2].clone();
        let mut out = lambda.clone();
        out.0[i1] = out.0[i1].clone() + l2.clone();
        out.0[i2] = -l2.clone();
        if self.graph.legs()[self.full_leg] >= 2 {
            let i3 = self.graph.node(self.full_leg, 2);
            out.0[i3] = out.0[i3].clone() + l2;
        }
        out
    }

    /// `Delta . lambda`.
    pub fn level<F: Scalar>(&self, lambda: &ParamVector<F>) -> F {
        self.dims.dot(lambda)
    }

    /// The reflection at the first full-leg node; agrees with
    /// [`Self::permute_params`].
    pub fn permute_as_reflection<F: Scalar>(&self, lambda: &ParamVector<F>) -> ParamVector<F> {
        reflect_param(&cartan_matrix(&self.graph), self.graph.node(self.full_leg, 1), lambda)
    }
}

/// Exact representation of a single leg with dimensions `dims` (center
/// first, strictly decreasing to 1) whose moment map is the scalar `params[k]`
/// at the node of depth `k + 1`. `gauge` supplies a change of basis at each
/// node, so that the maps are not simply diagonal.
pub fn leg_representation<F: Scalar>(
    dims: &[usize],
    params: &[F],
    gauge: &[(Mat<F>, Mat<F>)],
) -> Result<QuiverRep<F>> {
    let len = dims.len() - 1;
    if params.len() != len || gauge.len() != dims.len() {
        return Err(Error::Shape("one parameter per leg node, one gauge per node".into()));
    }
    if dims.windows(2).any(|w| w[1] + 1 != w[0]) || dims[len] != 1 {
        return Err(Error::Input("leg dimensions must be n, n-1, ..., 1".into()));
    }
    let graph = StarGraph::new(vec![len])?;
    // Build from the free end inwards: x is phi phi* at the node one step
    // closer to the center, kept diagonal.
    let mut phi = vec![Mat::zeros(0, 0); len];
    let mut phi_star = vec![Mat::zeros(0, 0); len];
    let mut inner = Mat::<F>::zeros(1, 1);
    for depth in (1..=len).rev() {
        let (dt, dh) = (dims[depth], dims[depth - 1]);
        let target = inner.sub(&Mat::identity(dt).scale(&params[depth - 1]));
        phi[depth - 1] = Mat::from_fn(dh, dt, |i, j| if i == j { F::one() } else { F::zero() });
        phi_star[depth - 1] = Mat::from_fn(dt, dh, |i, j| if j < dt { target[(i, j)].clone() } else { F::zero() });
        inner = phi[depth - 1].mul(&phi_star[depth - 1]);
    }
    let rep = QuiverRep::new(graph, DimensionVector(dims.to_vec()), phi, phi_star)?;
    let (g, g_inv): (Vec<_>, Vec<_>) = gauge.iter().cloned().unzip();
    Ok(rep.conjugate(&g, &g_inv))
}

/// Random unimodular integer matrix (product of unit triangular factors),
/// together with its inverse.
pub fn random_unimodular<F: Scalar, R: Rng>(n: usize, rng: &mut R) -> (Mat<F>, Mat<F>) {
    let lower = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => F::one(),
        std::cmp::Ordering::Greater => F::from_i64(rng.random_range(-3..=3)),
        std::cmp::Ordering::Less => F::zero(),
    });
    let upper = Mat::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => F::one(),
        std::cmp::Ordering::Less => F::from_i64(rng.random_range(-3..=3)),
        std::cmp::Ordering::Greater => F::zero(),
    });
    let g = lower.mul(&upper);
    let inv = g.inverse().expect("unimodular");
    (g, inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly_from_roots;
    use crate::scalar::{q, Q};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rep_has_zero_moment_map() {
        let ty = AffineType::E6;
        let rep = QuiverRep::<Q>::zero(ty.graph(), DimensionVector::delta(ty));
        assert!(rep.moment_map().iter().all(|m| *m == Mat::zeros(m.rows(), m.cols())));
    }

    #[test]
    fn moment_map_traces_cancel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ty in AffineType::ALL {
            let rep = QuiverRep::random(ty.graph(), DimensionVector::delta(ty), &mut rng);
            let total: C64 = rep.moment_map().iter().map(Mat::trace).sum();
            assert!(total.norm() < 1e-12 * 10.0, "{ty}: {total}");
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = StarGraph::new(vec![1]).unwrap();
        let r = QuiverRep::<Q>::new(g, DimensionVector(vec![2, 1]), vec![Mat::zeros(1, 1)], vec![Mat::zeros(1, 2)]);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn dims_of_w() {
        let expected = [(AffineType::D4, 16), (AffineType::E6, 48), (AffineType::E7, 96), (AffineType::E8, 240)];
        for (ty, w) in expected {
            assert_eq!(dim_w(&ty.graph(), &DimensionVector::delta(ty)), w);
        }
    }

    #[test]
    fn expected_dimensions() {
        assert_eq!(expected_dim(&[vec![3, 3], vec![2, 2, 2], vec![1; 6]], 6).unwrap(), 2);
        assert_eq!(expected_dim(&[vec![1; 3], vec![1; 3], vec![1; 3]], 3).unwrap(), 2);
        assert_eq!(expected_dim(&[vec![2, 2], vec![1; 4], vec![1; 4]], 4).unwrap(), 2);
        assert_eq!(expected_dim(&vec![vec![1, 1]; 4], 2).unwrap(), 2);
        assert!(expected_dim(&[vec![1, 1]], 3).is_err());
    }

    #[test]
    fn increments() {
        let d4 = AlmostAffineQuiver::affine(AffineType::D4).increment();
        assert_eq!(d4.graph.legs(), &[1, 1, 1, 2]);
        assert_eq!(d4.dims.0, vec![3, 1, 1, 1, 2, 1]);
        let e7 = AlmostAffineQuiver::affine(AffineType::E7).increment();
        assert_eq!(e7.dims.0, vec![5, 2, 3, 2, 1, 4, 3, 2, 1]);
        let e8 = AlmostAffineQuiver::affine(AffineType::E8).increment();
        assert_eq!(e8.dims.center(), 7);
        assert_eq!(e8.dims.leg(&e8.graph, e8.full_leg), vec![6, 5, 4, 3, 2, 1]);
        for ty in AffineType::ALL {
            let inc = AlmostAffineQuiver::affine(ty).increment();
            let n = inc.dims.center();
            let adjacent: usize = (0..inc.graph.num_legs())
                .filter(|&l| l != inc.full_leg)
                .map(|l| inc.dims.0[inc.graph.node(l, 1)])
                .sum();
            assert_eq!(adjacent, n);
            assert!(is_full(&inc.graph, &inc.dims, inc.full_leg));
        }
        assert!(!is_almost_affine(&StarGraph::new(vec![1, 1]).unwrap(), &DimensionVector(vec![2, 1, 1])));
    }

    fn random_plus(inc: &IncrementedQuiver, rng: &mut ChaCha8Rng) -> ParamVector<Q> {
        let n = inc.graph.num_nodes();
        let mut l: ParamVector<Q> = ParamVector((0..n).map(|_| q(rng.random_range(-20..20), rng.random_range(1..9))).collect());
        let last = inc.graph.node(inc.full_leg, inc.graph.legs()[inc.full_leg]);
        let lvl = inc.level(&l);
        l.0[last] = l.0[last].clone() - lvl;
        l
    }

    #[test]
    fn shift_and_permute_preserve_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ty in AffineType::ALL {
            let inc = AlmostAffineQuiver::affine(ty).increment();
            for _ in 0..20 {
                let l = random_plus(&inc, &mut rng);
                assert_eq!(inc.level(&l), q(0, 1));
                assert_eq!(inc.shift_params(&l, &q(0, 1)), l);
                assert_eq!(inc.level(&inc.shift_params(&l, &q(7, 3))), q(0, 1));
                let p = inc.permute_params(&l);
                assert_eq!(inc.level(&p), q(0, 1));
                assert_eq!(inc.permute_params(&p), l);
                assert_eq!(p, inc.permute_as_reflection(&l));
                let proj = inc.project_params(&l);
                let delta = ty.graph().delta().unwrap();
                assert_eq!(delta.dot(&proj), q(0, 1));
                assert_eq!(inc.project_params(&inc.lift_params(&proj)), proj);
            }
        }
    }

    #[test]
    fn e7_shift_moves_center_and_adjacent_legs() {
        let inc = AlmostAffineQuiver::affine(AffineType::E7).increment();
        let l = ParamVector::<Q>::from_ints(&[10, 20, 30, 40, 50, 60, 70, 80, 90]);
        let s = inc.shift_params(&l, &q(1, 1));
        assert_eq!(s, ParamVector::from_ints(&[11, 19, 29, 40, 50, 60, 70, 80, 90]));
    }

    #[test]
    fn leg_moment_map_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [4, 3, 2, 1];
        let gauge: Vec<_> = dims.iter().map(|&d| random_unimodular::<Q, _>(d, &mut rng)).collect();
        let params = [q(2, 3), q(-5, 7), q(1, 4)];
        let rep = leg_representation(&dims, &params, &gauge).unwrap();
        let mu = rep.moment_map();
        for (k, p) in params.iter().enumerate() {
            assert_eq!(mu[k + 1], Mat::identity(dims[k + 1]).scale(p));
        }
        let top = rep.phi[0].mul(&rep.phi_star[0]);
        let (l1, l2, l3) = (params[0].clone(), params[1].clone(), params[2].clone());
        let expected = poly_from_roots(&[q(0, 1), -l1.clone(), -l1.clone() - l2.clone(), -l1 - l2 - l3]);
        assert_eq!(top.charpoly(), expected);
    }
}
