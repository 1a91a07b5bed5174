//! Star-shaped Dynkin diagrams, their root lattices and Weyl group actions.
//!
//! Nodes are indexed canonically: `0` is the center, then the legs in
//! nondecreasing length order, each leg listed from the node adjacent to the
//! center outwards. For the affine types the extending node is the free end
//! of the last (longest) leg.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::exact::smith_diagonal;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AffineType {
    D4,
    E6,
    E7,
    E8,
}

impl AffineType {
    pub const ALL: [AffineType; 4] = [AffineType::D4, AffineType::E6, AffineType::E7, AffineType::E8];

    /// Leg lengths of the affine (extended) diagram.
    pub fn legs(self) -> &'static [usize] {
        match self {
            AffineType::D4 => &[1, 1, 1, 1],
            AffineType::E6 => &[2, 2, 2],
            AffineType::E7 => &[1, 3, 3],
            AffineType::E8 => &[1, 2, 5],
        }
    }

    pub fn graph(self) -> StarGraph {
        StarGraph::new(self.legs().to_vec()).expect("affine star legs are valid")
    }

    /// Rank of the finite root system.
    pub fn rank(self) -> usize {
        self.legs().iter().sum()
    }

    /// Order of the finite Weyl group.
    pub fn weyl_order(self) -> u64 {
        match self {
            AffineType::D4 => 192,
            AffineType::E6 => 51_840,
            AffineType::E7 => 2_903_040,
            AffineType::E8 => 696_729_600,
        }
    }

    pub fn coxeter_number(self) -> usize {
        match self {
            AffineType::D4 => 6,
            AffineType::E6 => 12,
            AffineType::E7 => 18,
            AffineType::E8 => 30,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AffineType::D4 => "D4",
            AffineType::E6 => "E6",
            AffineType::E7 => "E7",
            AffineType::E8 => "E8",
        }
    }
}

impl fmt::Display for AffineType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AffineType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D4" => Ok(AffineType::D4),
            "E6" => Ok(AffineType::E6),
            "E7" => Ok(AffineType::E7),
            "E8" => Ok(AffineType::E8),
            other => Err(Error::Input(format!("unknown diagram type {other:?}"))),
        }
    }
}

/// A star-shaped graph: one center joined to the first node of each leg.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StarGraph {
    legs: Vec<usize>,
    offsets: Vec<usize>,
}

impl StarGraph {
    /// Legs are sorted into canonical (nondecreasing) order.
    pub fn new(mut legs: Vec<usize>) -> Result<Self> {
        if legs.is_empty() {
            return Err(Error::Input("a star graph needs at least one leg".into()));
        }
        if legs.contains(&0) {
            return Err(Error::Input("leg lengths must be positive".into()));
        }
        legs.sort_unstable();
        let mut offsets = Vec::with_capacity(legs.len());
        let mut next = 1;
        for &len in &legs {
            offsets.push(next);
            next += len;
        }
        Ok(Self { legs, offsets })
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    pub fn num_nodes(&self) -> usize {
        1 + self.legs.iter().sum::<usize>()
    }

    pub fn center(&self) -> usize {
        0
    }

    /// Node at `depth` (1-based, 1 = adjacent to the center) on leg `leg`.
    pub fn node(&self, leg: usize, depth: usize) -> usize {
        assert!(depth >= 1 && depth <= self.legs[leg], "depth out of range");
        self.offsets[leg] + depth - 1
    }

    pub fn leg_nodes(&self, leg: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.legs[leg]).map(move |d| self.node(leg, d))
    }

    /// `(leg, depth)` for a non-center node.
    pub fn position(&self, node: usize) -> Option<(usize, usize)> {
        if node == 0 || node >= self.num_nodes() {
            return None;
        }
        let leg = self.offsets.iter().rposition(|&o| o <= node)?;
        Some((leg, node - self.offsets[leg] + 1))
    }

    /// Edges as `(tail, head)`, every edge pointing towards the center.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for leg in 0..self.num_legs() {
            for d in 1..=self.legs[leg] {
                let head = if d == 1 { 0 } else { self.node(leg, d - 1) };
                out.push((self.node(leg, d), head));
            }
        }
        out
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.edges()
            .iter()
            .any(|&(t, h)| (t, h) == (i, j) || (t, h) == (j, i))
    }

    pub fn extending_node(&self) -> usize {
        let last = self.num_legs() - 1;
        self.node(last, self.legs[last])
    }

    pub fn affine_type(&self) -> Option<AffineType> {
        AffineType::ALL
            .into_iter()
            .find(|t| t.legs() == self.legs.as_slice())
    }

    /// Null vector of the Cartan matrix with extending coefficient 1, when
    /// the graph is affine.
    pub fn delta(&self) -> Option<RootVector> {
        let center = self.legs.iter().fold(1usize, |acc, &l| acc.lcm(&(l + 1)));
        let mut d = vec![0i64; self.num_nodes()];
        d[0] = center as i64;
        for (leg, &len) in self.legs.iter().enumerate() {
            for depth in 1..=len {
                d[self.node(leg, depth)] = (center * (len + 1 - depth) / (len + 1)) as i64;
            }
        }
        let d = RootVector(d);
        let c = cartan_matrix(self);
        (c.apply(&d.0).iter().all(|&v| v == 0)).then_some(d)
    }

    /// Nodes of the finite diagram (everything except the extending node).
    pub fn finite_nodes(&self) -> Vec<usize> {
        let ext = self.extending_node();
        (0..self.num_nodes()).filter(|&i| i != ext).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanMatrix(pub Vec<Vec<i64>>);

impl CartanMatrix {
    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.0[i][j]
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        self.0
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn det(&self) -> i64 {
        use crate::exact::Mat;
        use crate::scalar::{Scalar, Q};
        let n = self.size();
        let m = Mat::from_fn(n, n, |i, j| Q::from_i64(self.0[i][j]));
        let d = m.det();
        i64::try_from(d.to_integer()).expect("small determinant")
    }

    pub fn submatrix(&self, nodes: &[usize]) -> CartanMatrix {
        CartanMatrix(
            nodes
                .iter()
                .map(|&i| nodes.iter().map(|&j| self.0[i][j]).collect())
                .collect(),
        )
    }
}

/// `C = 2 Id - A` with `A` the adjacency matrix.
pub fn cartan_matrix(g: &StarGraph) -> CartanMatrix {
    let n = g.num_nodes();
    let mut c = vec![vec![0i64; n]; n];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (t, h) in g.edges() {
        c[t][h] -= 1;
        c[h][t] -= 1;
    }
    CartanMatrix(c)
}

/// Integer coefficients over the nodes (dimension vectors, roots).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootVector(pub Vec<i64>);

impl RootVector {
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        RootVector(v)
    }

    pub fn neg(&self) -> Self {
        RootVector(self.0.iter().map(|v| -v).collect())
    }

    /// The pairing `beta . lambda = sum beta_i lambda_i`.
    pub fn dot<F: Scalar>(&self, lambda: &ParamVector<F>) -> F {
        self.0
            .iter()
            .zip(&lambda.0)
            .fold(F::zero(), |acc, (b, l)| acc + F::from_i64(*b) * l.clone())
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v >= 0) && self.0.iter().any(|&v| v > 0)
    }
}

/// Parameters `lambda_i` over the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector<F>(pub Vec<F>);

impl<F: Scalar> ParamVector<F> {
    pub fn zeros(n: usize) -> Self {
        ParamVector(vec![F::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        ParamVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        )
    }

    pub fn add_scaled_int(&self, v: &[i64], k: i64) -> Self {
        ParamVector(
            self.0
                .iter()
                .zip(v)
                .map(|(a, b)| a.clone() + F::from_i64(b * k))
                .collect(),
        )
    }

    pub fn from_ints(v: &[i64]) -> Self {
        ParamVector(v.iter().map(|&x| F::from_i64(x)).collect())
    }

    pub fn to_c64(&self) -> Vec<crate::scalar::C64> {
        self.0.iter().map(Scalar::to_c64).collect()
    }
}

/// `alpha_i = sum_j (eps_i, eps_j) eps_j`, i.e. row `i` of the Cartan matrix.
pub fn alpha(g: &StarGraph, i: usize) -> Vec<i64> {
    cartan_matrix(g).0[i].clone()
}

/// The bilinear form `(beta, gamma) = beta^T C gamma`.
pub fn form(c: &CartanMatrix, beta: &RootVector, gamma: &RootVector) -> i64 {
    let cg = c.apply(&gamma.0);
    beta.0.iter().zip(cg).map(|(a, b)| a * b).sum()
}

/// `s_i(beta) = beta - (beta, eps_i) eps_i`.
pub fn reflect_root(c: &CartanMatrix, i: usize, beta: &RootVector) -> RootVector {
    let pairing: i64 = beta.0.iter().zip(&c.0[i]).map(|(b, ci)| b * ci).sum();
    let mut out = beta.clone();
    out.0[i] -= pairing;
    out
}

/// `r_i(lambda) = lambda - lambda_i alpha_i`.
pub fn reflect_param<F: Scalar>(c: &CartanMatrix, i: usize, lambda: &ParamVector<F>) -> ParamVector<F> {
    let li = lambda.0[i].clone();
    if li.is_exact_zero() {
        return lambda.clone();
    }
    ParamVector(
        lambda
            .0
            .iter()
            .zip(&c.0[i])
            .map(|(l, &a)| {
                if a == 0 {
                    l.clone()
                } else {
                    l.clone() - li.clone() * F::from_i64(a)
                }
            })
            .collect(),
    )
}

/// Apply a word of dual reflections, rightmost letter first.
pub fn apply_word<F: Scalar>(c: &CartanMatrix, word: &[usize], lambda: &ParamVector<F>) -> ParamVector<F> {
    word.iter()
        .rev()
        .fold(lambda.clone(), |acc, &i| reflect_param(c, i, &acc))
}

/// `delta . lambda`.
pub fn level<F: Scalar>(delta: &RootVector, lambda: &ParamVector<F>) -> F {
    delta.dot(lambda)
}

/// Coxeter exponent for a simply laced diagram.
pub fn coxeter_exponent(g: &StarGraph, i: usize, j: usize) -> usize {
    if i == j {
        1
    } else if g.adjacent(i, j) {
        3
    } else {
        2
    }
}

/// Where a root's hyperplane comes from in the eigenvalue picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootKind {
    /// A coincidence between eigenvalues of one residue (the root, shifted
    /// by a multiple of `delta`, lives on a single leg).
    Coincidence { leg: usize },
    /// A trace relation from a block-triangular decomposition.
    BlockTriangular,
}

/// The finite root system of an affine star diagram, in root coordinates
/// (coefficient 0 on the extending node).
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub graph: StarGraph,
    pub cartan: CartanMatrix,
    pub delta: RootVector,
    pub roots: Vec<RootVector>,
}

impl RootSystem {
    /// Breadth-first closure of the simple roots under simple reflections.
    pub fn new(ty: AffineType) -> Self {
        let graph = ty.graph();
        let cartan = cartan_matrix(&graph);
        let delta = graph.delta().expect("affine type has a null root");
        let nodes = graph.finite_nodes();
        let n = graph.num_nodes();
        let mut seen: HashSet<RootVector> = HashSet::new();
        let mut queue: VecDeque<RootVector> = VecDeque::new();
        let mut roots = Vec::new();
        for &i in &nodes {
            let e = RootVector::unit(n, i);
            if seen.insert(e.clone()) {
                queue.push_back(e);
            }
        }
        while let Some(beta) = queue.pop_front() {
            for &i in &nodes {
                let s = reflect_root(&cartan, i, &beta);
                if seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
            roots.push(beta);
        }
        roots.sort();
        Self {
            graph,
            cartan,
            delta,
            roots,
        }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn positive(&self) -> impl Iterator<Item = &RootVector> {
        self.roots.iter().filter(|r| r.is_positive())
    }

    pub fn hyperplane_count(&self) -> usize {
        self.positive().count()
    }

    /// The root as an element of the level-zero subspace: `sum beta_j alpha_j`.
    pub fn to_h(&self, beta: &RootVector) -> Vec<i64> {
        let n = beta.0.len();
        let mut out = vec![0i64; n];
        for (j, &b) in beta.0.iter().enumerate() {
            if b != 0 {
                for (k, o) in out.iter_mut().enumerate() {
                    *o += b * self.cartan.0[j][k];
                }
            }
        }
        out
    }

    /// `((nu, nu))` computed as `beta^T C beta`.
    pub fn norm(&self, beta: &RootVector) -> i64 {
        form(&self.cartan, beta, beta)
    }

    pub fn classify(&self, beta: &RootVector) -> RootKind {
        let nc = self.delta.0[0];
        let c = beta.0[0];
        if c % nc == 0 {
            let k = -c / nc;
            let shifted: Vec<i64> = beta
                .0
                .iter()
                .zip(&self.delta.0)
                .map(|(b, d)| b + k * d)
                .collect();
            for leg in 0..self.graph.num_legs() {
                let on_leg: HashSet<usize> = self.graph.leg_nodes(leg).collect();
                if shifted
                    .iter()
                    .enumerate()
                    .all(|(i, &v)| v == 0 || on_leg.contains(&i))
                {
                    return RootKind::Coincidence { leg };
                }
            }
        }
        RootKind::BlockTriangular
    }

    /// Roots `nu` with `((lambda, nu)) = 0`, one per hyperplane (positive
    /// representatives). Empty iff `lambda` is regular.
    pub fn violated<F: Scalar>(&self, lambda: &ParamVector<F>) -> Vec<RootVector> {
        self.positive()
            .filter(|beta| beta.dot(lambda).is_exact_zero())
            .cloned()
            .collect()
    }

    pub fn is_regular<F: Scalar>(&self, lambda: &ParamVector<F>) -> Regularity {
        let violated = self.violated(lambda);
        Regularity {
            regular: violated.is_empty(),
            violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    pub violated: Vec<RootVector>,
}

/// `lambda` lies in `{ lambda_i in Z, lambda . delta = 0 }`.
pub fn weight_lattice_member<F: Scalar>(g: &StarGraph, lambda: &ParamVector<F>) -> bool {
    let Some(delta) = g.delta() else { return false };
    lambda.0.iter().all(Scalar::is_integral) && level(&delta, lambda).is_exact_zero()
}

/// Basis of the translation lattice: `eps_i - n_i eps_ext` for every
/// non-extending node.
pub fn weight_lattice_basis(g: &StarGraph) -> Vec<Vec<i64>> {
    let delta = g.delta().expect("affine graph");
    let ext = g.extending_node();
    g.finite_nodes()
        .into_iter()
        .map(|i| {
            let mut v = vec![0i64; g.num_nodes()];
            v[i] = 1;
            v[ext] = -delta.0[i];
            v
        })
        .collect()
}

/// `[P(R) : Q(R)]`, read off the Smith normal form of the finite Cartan matrix.
pub fn weight_lattice_index(ty: AffineType) -> i64 {
    let g = ty.graph();
    let c = cartan_matrix(&g).submatrix(&g.finite_nodes());
    smith_diagonal(&c.0).iter().product()
}

/// An element of the extended affine Weyl group: `lambda -> w(lambda) + mu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineWeylElement {
    pub word: Vec<usize>,
    pub translation: Vec<i64>,
}

impl AffineWeylElement {
    pub fn identity(n: usize) -> Self {
        Self {
            word: Vec::new(),
            translation: vec![0; n],
        }
    }

    pub fn new(g: &StarGraph, word: Vec<usize>, translation: Vec<i64>) -> Result<Self> {
        let n = g.num_nodes();
        if translation.len() != n {
            return Err(Error::Shape(format!(
                "translation has {} entries, graph has {n} nodes",
                translation.len()
            )));
        }
        if let Some(&bad) = word.iter().find(|&&i| i >= n) {
            return Err(Error::Input(format!("no node {bad}")));
        }
        let delta = g
            .delta()
            .ok_or_else(|| Error::Input("translations need an affine graph".into()))?;
        let lvl: i64 = delta.0.iter().zip(&translation).map(|(a, b)| a * b).sum();
        if lvl != 0 {
            return Err(Error::Input(format!("translation has level {lvl}, expected 0")));
        }
        Ok(Self { word, translation })
    }

    /// Build from exact parameters, rejecting non-integral entries.
    pub fn from_params<F: Scalar>(g: &StarGraph, word: Vec<usize>, mu: &ParamVector<F>) -> Result<Self> {
        if !weight_lattice_member(g, mu) {
            return Err(Error::Input("translation is not in the weight lattice".into()));
        }
        let translation = mu
            .0
            .iter()
            .map(|v| v.to_c64().re.round() as i64)
            .collect();
        Self::new(g, word, translation)
    }

    pub fn apply<F: Scalar>(&self, c: &CartanMatrix, lambda: &ParamVector<F>) -> ParamVector<F> {
        apply_word(c, &self.word, lambda).add_scaled_int(&self.translation, 1)
    }
}

/// Size of the orbit of `lambda` under the reflections at `generators`,
/// giving up (returning `None`) beyond `limit` elements.
pub fn orbit_size<F: Scalar + Eq + std::hash::Hash>(
    c: &CartanMatrix,
    generators: &[usize],
    lambda: &ParamVector<F>,
    limit: usize,
) -> Option<usize> {
    let mut seen: HashSet<Vec<F>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(lambda.0.clone());
    queue.push_back(lambda.clone());
    while let Some(l) = queue.pop_front() {
        for &i in generators {
            let r = reflect_param(c, i, &l);
            if seen.insert(r.0.clone()) {
                if seen.len() > limit {
                    return None;
                }
                queue.push_back(r);
            }
        }
    }
    Some(seen.len())
}

/// Diagram automorphism permuting legs of equal length (experimental: only
/// the action on parameters is provided). `perm[k]` is the leg that leg `k`
/// is sent to.
pub fn permute_legs<F: Scalar>(g: &StarGraph, perm: &[usize], lambda: &ParamVector<F>) -> Result<ParamVector<F>> {
    let legs = g.legs();
    let mut sorted = perm.to_vec();
    sorted.sort_unstable();
    if perm.len() != legs.len() || sorted != (0..legs.len()).collect::<Vec<_>>() {
        return Err(Error::Input(format!("{perm:?} is not a permutation of the legs")));
    }
    if perm.iter().enumerate().any(|(k, &p)| legs[k] != legs[p]) {
        return Err(Error::Input("can only exchange legs of equal length".into()));
    }
    let mut out = lambda.clone();
    for (k, &p) in perm.iter().enumerate() {
        for depth in 1..=legs[k] {
            out.0[g.node(p, depth)] = lambda.0[g.node(k, depth)].clone();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Q};

    #[test]
    fn d4_center_row() {
        let c = cartan_matrix(&AffineType::D4.graph());
        assert_eq!(c.0[0], vec![2, -1, -1, -1, -1]);
        assert!((0..5).all(|i| c.0[i][i] == 2));
    }

    #[test]
    fn affine_determinants_vanish_and_delta_spans_kernel() {
        for ty in AffineType::ALL {
            let g = ty.graph();
            let c = cartan_matrix(&g);
            assert_eq!(c.det(), 0, "{ty}");
            let d = g.delta().unwrap();
            assert!(c.apply(&d.0).iter().all(|&v| v == 0));
            assert_eq!(d.0[g.extending_node()], 1);
        }
    }

    #[test]
    fn delta_matches_mckay_dimensions() {
        assert_eq!(AffineType::D4.graph().delta().unwrap().0, vec![2, 1, 1, 1, 1]);
        assert_eq!(
            AffineType::E6.graph().delta().unwrap().0,
            vec![3, 2, 1, 2, 1, 2, 1]
        );
        assert_eq!(
            AffineType::E7.graph().delta().unwrap().0,
            vec![4, 2, 3, 2, 1, 3, 2, 1]
        );
        assert_eq!(
            AffineType::E8.graph().delta().unwrap().0,
            vec![6, 3, 4, 2, 5, 4, 3, 2, 1]
        );
        assert!(StarGraph::new(vec![1, 1, 1]).unwrap().delta().is_none());
    }

    #[test]
    fn positions_round_trip() {
        let g = AffineType::E8.graph();
        for leg in 0..g.num_legs() {
            for depth in 1..=g.legs()[leg] {
                assert_eq!(g.position(g.node(leg, depth)), Some((leg, depth)));
            }
        }
        assert_eq!(g.position(0), None);
        assert_eq!(g.extending_node(), 8);
    }

    #[test]
    fn simple_reflection_negates_its_root_and_fixes_delta() {
        for ty in AffineType::ALL {
            let g = ty.graph();
            let c = cartan_matrix(&g);
            let d = g.delta().unwrap();
            for i in 0..g.num_nodes() {
                let e = RootVector::unit(g.num_nodes(), i);
                assert_eq!(reflect_root(&c, i, &e), e.neg());
                assert_eq!(reflect_root(&c, i, &d), d);
            }
        }
    }

    #[test]
    fn reflection_fixes_params_with_zero_component() {
        let c = cartan_matrix(&AffineType::E6.graph());
        let l: ParamVector<Q> = ParamVector(vec![q(1, 2), q(0, 1), q(3, 1), q(-1, 3), q(0, 1), q(2, 1), q(5, 7)]);
        assert_eq!(reflect_param(&c, 1, &l), l);
    }

    #[test]
    fn root_counts() {
        let expected = [(AffineType::D4, 24), (AffineType::E6, 72), (AffineType::E7, 126), (AffineType::E8, 240)];
        for (ty, n) in expected {
            let rs = RootSystem::new(ty);
            assert_eq!(rs.len(), n, "{ty}");
            assert_eq!(rs.len(), ty.rank() * ty.coxeter_number());
            assert!(rs.roots.iter().all(|b| rs.norm(b) == 2));
        }
    }

    #[test]
    fn e8_relations_split_into_coincidences_and_block_relations() {
        let rs = RootSystem::new(AffineType::E8);
        let coincidences = rs
            .roots
            .iter()
            .filter(|b| matches!(rs.classify(b), RootKind::Coincidence { .. }))
            .count();
        assert_eq!(coincidences, 38);
        assert_eq!(rs.len() - coincidences, 202);
        assert_eq!(rs.hyperplane_count(), 120);
    }

    #[test]
    fn zero_params_violate_everything() {
        let rs = RootSystem::new(AffineType::D4);
        let reg = rs.is_regular(&ParamVector::<Q>::zeros(5));
        assert!(!reg.regular);
        assert_eq!(reg.violated.len(), 12);
    }

    #[test]
    fn leg_node_zero_is_irregular() {
        let rs = RootSystem::new(AffineType::E7);
        let mut l: ParamVector<Q> = ParamVector((1..=8).map(|k| q(k * k + 1, 7 + k)).collect());
        l.0[3] = q(0, 1);
        let lvl = level(&rs.delta, &l);
        let ext = rs.graph.extending_node();
        l.0[ext] = l.0[ext].clone() - lvl;
        let reg = rs.is_regular(&l);
        assert!(!reg.regular);
        assert!(reg.violated.contains(&RootVector::unit(8, 3)));
    }

    #[test]
    fn lattice_indices() {
        assert_eq!(weight_lattice_index(AffineType::D4), 4);
        assert_eq!(weight_lattice_index(AffineType::E6), 3);
        assert_eq!(weight_lattice_index(AffineType::E7), 2);
        assert_eq!(weight_lattice_index(AffineType::E8), 1);
    }

    #[test]
    fn affine_element_checks_translation() {
        let g = AffineType::D4.graph();
        let c = cartan_matrix(&g);
        let a1 = alpha(&g, 1);
        assert!(weight_lattice_member(&g, &ParamVector::<Q>::from_ints(&a1)));
        let id = AffineWeylElement::identity(5);
        let l: ParamVector<Q> = ParamVector(vec![q(1, 3), q(1, 5), q(-2, 7), q(1, 1), q(0, 1)]);
        assert_eq!(id.apply(&c, &l), l);
        assert!(AffineWeylElement::new(&g, vec![], vec![1, 0, 0, 0, 0]).is_err());
        let half: ParamVector<Q> = ParamVector(vec![q(1, 2), q(-1, 2), q(-1, 2), q(0, 1), q(0, 1)]);
        assert!(AffineWeylElement::from_params(&g, vec![], &half).is_err());
    }

    #[test]
    fn leg_permutation_requires_equal_lengths() {
        let g = AffineType::E7.graph();
        let l = ParamVector::<Q>::from_ints(&[1, 2, 3, 4, 5, 6, 7, 8]);
        let p = permute_legs(&g, &[0, 2, 1], &l).unwrap();
        assert_eq!(p.0, ParamVector::<Q>::from_ints(&[1, 2, 6, 7, 8, 3, 4, 5]).0);
        assert!(permute_legs(&g, &[1, 0, 2], &l).is_err());
    }
}
