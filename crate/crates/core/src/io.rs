//! File formats. Rationals are `"p/q"` strings and complex rationals
//! `[re, im]` pairs of them. JSON floats use the shortest representation
//! that parses back to the same double; CSV floats carry 17 significant
//! digits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynkin::{AffineType, ParamVector, RootKind, RootSystem, StarGraph};
use crate::error::{Error, Result};
use crate::exact::Mat;
use crate::fuchsian::{FuchsianSystem, Normalization};
use crate::linalg::CMat;
use crate::quiver::{DimensionVector, QuiverRep};
use crate::sakai::{params, wall_check, PointConfig, SakaiRow};
use crate::scalar::{format_cq, format_q, parse_cq, parse_q, C64, CQ};
use crate::weylops::{OrbitRow, WeylWord};

pub const SCHEMA_VERSION: u32 = 1;

pub type CqJson = [String; 2];

fn cq_json(v: &CQ) -> CqJson {
    format_cq(v)
}

fn cq_parse(v: &CqJson) -> Result<CQ> {
    parse_cq(v)
}

fn c64_json(v: &C64) -> [f64; 2] {
    [v.re, v.im]
}

fn c64_parse(v: &[f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Input(format!("unsupported schema version {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Parameter vector keyed by canonical node index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaFile {
    pub version: u32,
    #[serde(rename = "type")]
    pub ty: String,
    pub lambda: BTreeMap<usize, CqJson>,
}

fn lambda_map(lambda: &ParamVector<CQ>) -> BTreeMap<usize, CqJson> {
    lambda.0.iter().enumerate().map(|(i, v)| (i, cq_json(v))).collect()
}

fn lambda_from_map(map: &BTreeMap<usize, CqJson>, n: usize) -> Result<ParamVector<CQ>> {
    if map.len() != n || map.keys().copied().ne(0..n) {
        return Err(Error::Shape(format!("expected entries for nodes 0..{n}")));
    }
    Ok(ParamVector(map.values().map(cq_parse).collect::<Result<_>>()?))
}

pub fn lambda_to_json(ty: AffineType, lambda: &ParamVector<CQ>) -> String {
    let file = LambdaFile {
        version: SCHEMA_VERSION,
        ty: ty.to_string(),
        lambda: lambda_map(lambda),
    };
    pretty(&file)
}

pub fn lambda_from_json(s: &str) -> Result<(AffineType, ParamVector<CQ>)> {
    let file: LambdaFile = parse_json(s)?;
    check_version(file.version)?;
    let ty: AffineType = file.ty.parse()?;
    let lambda = lambda_from_map(&file.lambda, ty.graph().num_nodes())?;
    Ok((ty, lambda))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub legs: Vec<usize>,
    pub nodes: usize,
    /// `(tail, head)`, pointing towards the center.
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extending_node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<i64>>,
}

pub fn graph_json(g: &StarGraph) -> GraphJson {
    let delta = g.delta();
    GraphJson {
        legs: g.legs().to_vec(),
        nodes: g.num_nodes(),
        edges: g.edges(),
        extending_node: delta.as_ref().map(|_| g.extending_node()),
        delta: delta.map(|d| d.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootsJson {
    pub version: u32,
    #[serde(rename = "type")]
    pub ty: String,
    pub graph: GraphJson,
    pub count: usize,
    pub hyperplanes: usize,
    pub block_triangular: usize,
    pub coincidence: usize,
    /// Positive roots, coefficients on the simple roots.
    pub positive_roots: Vec<Vec<i64>>,
}

pub fn roots_json(ty: AffineType) -> RootsJson {
    let rs = RootSystem::new(ty);
    let coin = rs
        .roots
        .iter()
        .filter(|b| matches!(rs.classify(b), RootKind::Coincidence { .. }))
        .count();
    let block = rs.len() - coin;
    RootsJson {
        version: SCHEMA_VERSION,
        ty: ty.to_string(),
        graph: graph_json(&ty.graph()),
        count: rs.len(),
        hyperplanes: rs.hyperplane_count(),
        block_triangular: block,
        coincidence: coin,
        positive_roots: rs.positive().map(|b| b.0.clone()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub version: u32,
    #[serde(rename = "type")]
    pub ty: String,
    pub normalization: String,
    pub poles: Vec<[f64; 2]>,
    pub nu: CqJson,
    pub spectra: Vec<Vec<CqJson>>,
    /// Row-major, entries `[re, im]`; the last one sits at infinity.
    pub residues: Vec<Vec<Vec<[f64; 2]>>>,
    /// Parameters read off the spectra, when they are in slot form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<BTreeMap<usize, CqJson>>,
    /// Word applied to produce this system, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<WeylWord>,
}

fn matrix_json(a: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..a.nrows())
        .map(|r| (0..a.ncols()).map(|c| c64_json(&a[(r, c)])).collect())
        .collect()
}

fn matrix_parse(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("residues must be square".into()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Input("non-finite matrix entry".into()));
    }
    Ok(CMat::from_fn(n, n, |r, c| c64_parse(&rows[r][c])))
}

pub fn system_file(sys: &FuchsianSystem, word: Option<&WeylWord>) -> SystemFile {
    SystemFile {
        version: SCHEMA_VERSION,
        ty: sys.ty.to_string(),
        normalization: sys.normalization.name().to_string(),
        poles: sys.poles.iter().map(c64_json).collect(),
        nu: cq_json(&sys.nu),
        spectra: sys.spectra.iter().map(|s| s.iter().map(cq_json).collect()).collect(),
        residues: sys.residues.iter().map(matrix_json).collect(),
        lambda: sys.params().ok().map(|l| lambda_map(&l)),
        word: word.cloned(),
    }
}

pub fn system_to_json(sys: &FuchsianSystem, word: Option<&WeylWord>) -> String {
    pretty(&system_file(sys, word))
}

/// Parse a system file; an embedded parameter vector must agree with the
/// spectra.
pub fn system_from_json(s: &str) -> Result<(FuchsianSystem, Option<WeylWord>)> {
    let file: SystemFile = parse_json(s)?;
    check_version(file.version)?;
    let ty: AffineType = file.ty.parse()?;
    let sys = FuchsianSystem::new(
        ty,
        file.poles.iter().map(c64_parse).collect(),
        file.residues.iter().map(|m| matrix_parse(m)).collect::<Result<_>>()?,
        cq_parse(&file.nu)?,
        file.spectra
            .iter()
            .map(|s| s.iter().map(cq_parse).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?,
        Normalization::parse(&file.normalization)?,
    )?;
    if let Some(map) = &file.lambda {
        let embedded = lambda_from_map(map, ty.graph().num_nodes())?;
        if sys.params().ok().as_ref() != Some(&embedded) {
            return Err(Error::Input("embedded parameters disagree with the spectra".into()));
        }
    }
    Ok((sys, file.word))
}

/// Quiver representation with exact entries; every map is a matrix of
/// `[re, im]` rational pairs, one `phi` and one `phi_star` per edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuiverRepFile {
    pub version: u32,
    pub legs: Vec<usize>,
    pub dims: Vec<usize>,
    pub phi: Vec<Vec<Vec<CqJson>>>,
    pub phi_star: Vec<Vec<Vec<CqJson>>>,
}

fn mat_cq_json(m: &Mat<CQ>) -> Vec<Vec<CqJson>> {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| cq_json(&m[(r, c)])).collect())
        .collect()
}

fn mat_cq_parse(rows: &[Vec<CqJson>], cols_hint: usize) -> Result<Mat<CQ>> {
    let cols = rows.first().map_or(cols_hint, |r| r.len());
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape("ragged matrix".into()));
    }
    let parsed: Vec<Vec<CQ>> = rows
        .iter()
        .map(|r| r.iter().map(cq_parse).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(Mat::from_fn(rows.len(), cols, |r, c| parsed[r][c].clone()))
}

pub fn quiver_rep_to_json(rep: &QuiverRep<CQ>) -> String {
    let file = QuiverRepFile {
        version: SCHEMA_VERSION,
        legs: rep.graph.legs().to_vec(),
        dims: rep.dims.0.clone(),
        phi: rep.phi.iter().map(mat_cq_json).collect(),
        phi_star: rep.phi_star.iter().map(mat_cq_json).collect(),
    };
    pretty(&file)
}

pub fn quiver_rep_from_json(s: &str) -> Result<QuiverRep<CQ>> {
    let file: QuiverRepFile = parse_json(s)?;
    check_version(file.version)?;
    let graph = StarGraph::new(file.legs)?;
    let dims = DimensionVector(file.dims);
    if dims.0.len() != graph.num_nodes() {
        return Err(Error::Shape("dimension vector does not match the graph".into()));
    }
    let edges = graph.edges();
    if file.phi.len() != edges.len() || file.phi_star.len() != edges.len() {
        return Err(Error::Shape(format!("expected {} maps of each kind", edges.len())));
    }
    let phi = file
        .phi
        .iter()
        .zip(&edges)
        .map(|(m, &(t, _))| mat_cq_parse(m, dims.0[t]))
        .collect::<Result<_>>()?;
    let phi_star = file
        .phi_star
        .iter()
        .zip(&edges)
        .map(|(m, &(_, h))| mat_cq_parse(m, dims.0[h]))
        .collect::<Result<_>>()?;
    QuiverRep::new(graph, dims, phi, phi_star)
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("malformed number {s:?}")))
}

/// Columns: `step`, `lambda_k_re`, `lambda_k_im` per node, then
/// `sig_k_re`, `sig_k_im` per signature entry.
pub fn orbit_csv(rows: &[OrbitRow]) -> String {
    let mut out = String::new();
    let (n, s) = rows.first().map_or((0, 0), |r| (r.lambda.len(), r.signature.len()));
    let mut header = vec!["step".to_string()];
    for k in 0..n {
        header.push(format!("lambda_{k}_re"));
        header.push(format!("lambda_{k}_im"));
    }
    for k in 0..s {
        header.push(format!("sig_{k}_re"));
        header.push(format!("sig_{k}_im"));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut cells = vec![row.step.to_string()];
        for v in &row.lambda.0 {
            cells.extend(format_cq(v));
        }
        for z in &row.signature {
            cells.push(float(z.re));
            cells.push(float(z.im));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_orbit_csv(s: &str) -> Result<Vec<OrbitRow>> {
    let mut lines = s.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Input("empty CSV".into()))?.split(',').collect();
    let n = header.iter().filter(|h| h.starts_with("lambda_")).count() / 2;
    let s_len = header.iter().filter(|h| h.starts_with("sig_")).count() / 2;
    if header.first() != Some(&"step") || header.len() != 1 + 2 * n + 2 * s_len {
        return Err(Error::Input("unexpected orbit CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Input(format!("row has {} cells, expected {}", cells.len(), header.len())));
            }
            let step = cells[0]
                .parse()
                .map_err(|_| Error::Input(format!("malformed step {:?}", cells[0])))?;
            let lambda = (0..n)
                .map(|k| Ok(CQ::new(parse_q(cells[1 + 2 * k])?, parse_q(cells[2 + 2 * k])?)))
                .collect::<Result<Vec<_>>>()?;
            let base = 1 + 2 * n;
            let signature = (0..s_len)
                .map(|k| Ok(C64::new(parse_float(cells[base + 2 * k])?, parse_float(cells[base + 2 * k + 1])?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(OrbitRow {
                step,
                lambda: ParamVector(lambda),
                signature,
            })
        })
        .collect()
}

/// Columns: `step`, `u_1..u_r`, `lambda_k` per node, and the walls hit,
/// separated by `;`.
pub fn sakai_csv(rows: &[SakaiRow]) -> String {
    let r = rows.first().map_or(0, |row| row.config.points());
    let mut header = vec!["step".to_string()];
    header.extend((1..=r).map(|i| format!("u_{i}")));
    header.extend((0..r).map(|k| format!("lambda_{k}")));
    header.push("walls".into());
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut cells = vec![row.step.to_string()];
        cells.extend(row.config.u.iter().map(format_q));
        cells.extend(row.params.iter().cloned());
        cells.push(row.walls.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";"));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parse a configuration orbit; parameters and walls are recomputed from
/// the configuration and must match the recorded ones.
pub fn parse_sakai_csv(s: &str) -> Result<Vec<SakaiRow>> {
    let mut lines = s.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Input("empty CSV".into()))?.split(',').collect();
    let r = header.iter().filter(|h| h.starts_with("u_")).count();
    if header.first() != Some(&"step") || header.len() != 2 + 2 * r || header.last() != Some(&"walls") {
        return Err(Error::Input("unexpected configuration CSV header".into()));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header.len() {
                return Err(Error::Input(format!("row has {} cells, expected {}", cells.len(), header.len())));
            }
            let step = cells[0]
                .parse()
                .map_err(|_| Error::Input(format!("malformed step {:?}", cells[0])))?;
            let config = PointConfig::new(cells[1..=r].iter().map(|c| parse_q(c)).collect::<Result<_>>()?)?;
            let row = SakaiRow {
                step,
                params: params(&config).0.iter().map(format_q).collect(),
                walls: wall_check(&config),
                config,
            };
            let recorded: Vec<&str> = cells[1 + r..1 + 2 * r].to_vec();
            let walls = row.walls.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(";");
            if row.params.iter().map(String::as_str).ne(recorded.iter().copied()) || walls != cells[1 + 2 * r] {
                return Err(Error::Input(format!("row {step} is inconsistent with its configuration")));
            }
            Ok(row)
        })
        .collect()
}

/// One row per positive root: its relation kind and coefficients.
pub fn roots_csv(ty: AffineType) -> String {
    let rs = RootSystem::new(ty);
    let n = ty.graph().num_nodes();
    let mut out = String::from("root,kind,leg");
    for k in 0..n {
        out.push_str(&format!(",c_{k}"));
    }
    out.push('\n');
    for (i, b) in rs.positive().enumerate() {
        let (kind, leg) = match rs.classify(b) {
            RootKind::Coincidence { leg } => ("coincidence", (leg + 1).to_string()),
            RootKind::BlockTriangular => ("block_triangular", String::new()),
        };
        let coeffs: Vec<String> = b.0.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!("{i},{kind},{leg},{}\n", coeffs.join(",")));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRowJson {
    pub step: usize,
    pub lambda: Vec<CqJson>,
    pub signature: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitFile {
    pub version: u32,
    #[serde(rename = "type")]
    pub ty: String,
    pub mu: Vec<i64>,
    pub rows: Vec<OrbitRowJson>,
}

pub fn orbit_json(ty: AffineType, mu: &[i64], rows: &[OrbitRow]) -> String {
    pretty(&OrbitFile {
        version: SCHEMA_VERSION,
        ty: ty.to_string(),
        mu: mu.to_vec(),
        rows: rows
            .iter()
            .map(|r| OrbitRowJson {
                step: r.step,
                lambda: r.lambda.0.iter().map(cq_json).collect(),
                signature: r.signature.iter().map(c64_json).collect(),
            })
            .collect(),
    })
}

pub fn parse_orbit_json(s: &str) -> Result<(AffineType, Vec<i64>, Vec<OrbitRow>)> {
    let file: OrbitFile = parse_json(s)?;
    check_version(file.version)?;
    let ty: AffineType = file.ty.parse()?;
    let rows = file
        .rows
        .iter()
        .map(|r| {
            Ok(OrbitRow {
                step: r.step,
                lambda: ParamVector(r.lambda.iter().map(cq_parse).collect::<Result<_>>()?),
                signature: r.signature.iter().map(c64_parse).collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok((ty, file.mu, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SakaiFile {
    pub version: u32,
    pub points: usize,
    pub mu: Vec<i64>,
    pub rows: Vec<SakaiRow>,
}

pub fn sakai_json(mu: &[i64], rows: &[SakaiRow]) -> String {
    pretty(&SakaiFile {
        version: SCHEMA_VERSION,
        points: rows.first().map_or(0, |r| r.config.points()),
        mu: mu.to_vec(),
        rows: rows.to_vec(),
    })
}

pub fn parse_sakai_json(s: &str) -> Result<SakaiFile> {
    let file: SakaiFile = parse_json(s)?;
    check_version(file.version)?;
    for row in &file.rows {
        let expect: Vec<String> = params(&row.config).0.iter().map(format_q).collect();
        if row.params != expect || row.walls != wall_check(&row.config) {
            return Err(Error::Input(format!("row {} is inconsistent with its configuration", row.step)));
        }
    }
    Ok(file)
}

/// Configuration file: a JSON list of `"p/q"` strings.
pub fn config_from_json(s: &str) -> Result<PointConfig> {
    parse_json(s)
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    Ok(serde_json::from_str(s)?)
}
