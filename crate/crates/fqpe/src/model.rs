//! Fermi-Hubbard Hamiltonians in a fixed (n_up, n_down) sector and the
//! normalized spectrum + reference overlaps derived from them.

use crate::error::{invalid, Error, Result};
use crate::numerics::{hermitian_eig, CMat, HermitianMatrix};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Lattice {
    Chain { length: usize },
    Grid { rows: usize, cols: usize },
}

impl Lattice {
    pub fn sites(&self) -> usize {
        match *self {
            Lattice::Chain { length } => length,
            Lattice::Grid { rows, cols } => rows * cols,
        }
    }

    /// Nearest-neighbour bonds, open boundaries. Grid sites are row-major.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        match *self {
            Lattice::Chain { length } => (0..length.saturating_sub(1)).map(|i| (i, i + 1)).collect(),
            Lattice::Grid { rows, cols } => {
                let mut b = Vec::new();
                for r in 0..rows {
                    for c in 0..cols {
                        let s = r * cols + c;
                        if c + 1 < cols {
                            b.push((s, s + 1));
                        }
                        if r + 1 < rows {
                            b.push((s, s + cols));
                        }
                    }
                }
                b
            }
        }
    }

    /// Parses `chain:L` or `grid:RxC`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Invalid(format!("bad lattice '{s}'")))?;
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad lattice size '{x}'")));
        match kind {
            "chain" => Ok(Lattice::Chain { length: num(rest)? }),
            "grid" => {
                let (r, c) = rest.split_once('x').ok_or_else(|| Error::Invalid(format!("bad grid '{rest}'")))?;
                Ok(Lattice::Grid { rows: num(r)?, cols: num(c)? })
            }
            _ => invalid(format!("unknown lattice kind '{kind}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub lattice: Lattice,
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    pub n_up: usize,
    pub n_down: usize,
}

const MAX_SITES: usize = 32;

impl HubbardSpec {
    pub fn new(lattice: Lattice, t: f64, u: f64, n_up: usize, n_down: usize) -> Result<Self> {
        let s = HubbardSpec { lattice, t, u, n_up, n_down };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.sites();
        if n == 0 {
            return invalid("lattice must have at least one site");
        }
        if n > MAX_SITES {
            return invalid(format!("at most {MAX_SITES} sites supported, got {n}"));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return invalid(format!("hopping t must be finite and non-negative, got {}", self.t));
        }
        if !(self.u >= 0.0) || !self.u.is_finite() {
            return invalid(format!("U must be finite and non-negative, got {}", self.u));
        }
        if self.n_up + self.n_down == 0 {
            return invalid("need at least one electron");
        }
        if self.n_up > n || self.n_down > n {
            return invalid(format!("particle numbers ({}, {}) exceed {n} sites", self.n_up, self.n_down));
        }
        Ok(())
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites()
    }
}

fn masks_with_bits(sites: usize, bits: usize) -> Vec<u64> {
    let mut out = Vec::new();
    if bits == 0 {
        out.push(0);
        return out;
    }
    let mut m: u64 = (1u64 << bits) - 1;
    let limit = 1u64 << sites;
    while m < limit {
        out.push(m);
        // next permutation of the bit pattern
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub site_count: usize,
    /// (up mask, down mask), lexicographic.
    pub states: Vec<(u64, u64)>,
    index: HashMap<(u64, u64), usize>,
}

impl SectorBasis {
    pub fn new(sites: usize, n_up: usize, n_down: usize) -> Self {
        let ups = masks_with_bits(sites, n_up);
        let downs = masks_with_bits(sites, n_down);
        let mut states = Vec::with_capacity(ups.len() * downs.len());
        for &u in &ups {
            for &d in &downs {
                states.push((u, d));
            }
        }
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        SectorBasis { site_count: sites, states, index }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, up: u64, down: u64) -> Option<usize> {
        self.index.get(&(up, down)).copied()
    }
}

#[derive(Debug, Clone)]
pub struct HubbardHamiltonian {
    pub basis: SectorBasis,
    pub matrix: HermitianMatrix,
}

/// Sign and target mask for moving a fermion from `from` to `to` within one species.
fn hop(mask: u64, from: usize, to: usize) -> Option<(u64, f64)> {
    if mask & (1 << from) == 0 || mask & (1 << to) != 0 {
        return None;
    }
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    let between = if hi > lo + 1 { ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1) } else { 0 };
    let parity = (mask & between).count_ones();
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((mask ^ (1 << from) ^ (1 << to), sign))
}

pub fn build_hubbard(spec: &HubbardSpec) -> Result<HubbardHamiltonian> {
    spec.validate()?;
    let basis = SectorBasis::new(spec.sites(), spec.n_up, spec.n_down);
    if basis.is_empty() {
        return invalid("sector dimension is zero");
    }
    let n = basis.len();
    let bonds = spec.lattice.bonds();
    let mut m = CMat::zeros(n, n);
    for (col, &(up, down)) in basis.states.iter().enumerate() {
        let doubles = (up & down).count_ones() as f64;
        m[(col, col)] += C64::new(spec.u * doubles, 0.0);
        if spec.t == 0.0 {
            continue;
        }
        for &(p, q) in &bonds {
            for (a, b) in [(p, q), (q, p)] {
                if let Some((nu, s)) = hop(up, a, b) {
                    let row = basis.index_of(nu, down).expect("hop stays in sector");
                    m[(row, col)] += C64::new(-spec.t * s, 0.0);
                }
                if let Some((nd, s)) = hop(down, a, b) {
                    let row = basis.index_of(up, nd).expect("hop stays in sector");
                    m[(row, col)] += C64::new(-spec.t * s, 0.0);
                }
            }
        }
    }
    Ok(HubbardHamiltonian { basis, matrix: HermitianMatrix::new(m)? })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeelPattern {
    LeftPackedAlternating,
    SpreadAlternating,
}

impl NeelPattern {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "left_packed" | "left_packed_alternating" => Ok(NeelPattern::LeftPackedAlternating),
            "spread" | "spread_alternating" => Ok(NeelPattern::SpreadAlternating),
            _ => invalid(format!("unknown Neel pattern '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceState {
    Basis(usize),
    Vector(Vec<C64>),
}

impl ReferenceState {
    pub fn amplitudes(&self, dim: usize) -> Result<Vec<C64>> {
        match self {
            ReferenceState::Basis(i) => {
                if *i >= dim {
                    return invalid(format!("basis index {i} outside sector of dimension {dim}"));
                }
                let mut v = vec![C64::new(0.0, 0.0); dim];
                v[*i] = C64::new(1.0, 0.0);
                Ok(v)
            }
            ReferenceState::Vector(v) => {
                if v.len() != dim {
                    return Err(Error::DimensionMismatch(format!("reference has {} entries, sector {dim}", v.len())));
                }
                let nrm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if (nrm - 1.0).abs() > 1e-12 {
                    return invalid(format!("reference state norm {nrm} is not 1"));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Occupied sites and their spins for a Neel pattern.
pub fn neel_occupation(spec: &HubbardSpec, pattern: NeelPattern, start: Spin) -> Result<(u64, u64)> {
    let sites = spec.sites();
    let ne = spec.n_up + spec.n_down;
    if ne > sites {
        return invalid(format!("{ne} electrons do not fit a single-occupancy pattern on {sites} sites"));
    }
    let positions: Vec<usize> = match pattern {
        NeelPattern::LeftPackedAlternating => (0..ne).collect(),
        NeelPattern::SpreadAlternating => (0..ne).map(|j| (2 * j + 1) * sites / (2 * ne)).collect(),
    };
    let (mut up, mut down) = (0u64, 0u64);
    for (j, &s) in positions.iter().enumerate() {
        let is_up = (j % 2 == 0) == (start == Spin::Up);
        if is_up {
            up |= 1 << s;
        } else {
            down |= 1 << s;
        }
    }
    if up.count_ones() as usize != spec.n_up || down.count_ones() as usize != spec.n_down {
        return invalid(format!(
            "alternating pattern gives ({}, {}) electrons, sector needs ({}, {})",
            up.count_ones(),
            down.count_ones(),
            spec.n_up,
            spec.n_down
        ));
    }
    Ok((up, down))
}

pub fn neel_state(spec: &HubbardSpec, basis: &SectorBasis, pattern: NeelPattern, start: Spin) -> Result<ReferenceState> {
    let (up, down) = neel_occupation(spec, pattern, start)?;
    let idx = basis.index_of(up, down).ok_or_else(|| Error::Invalid("Neel state not in sector basis".into()))?;
    Ok(ReferenceState::Basis(idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ScalePolicy {
    Spectral { margin: f64 },
    Explicit { lambda: f64 },
}

impl Default for ScalePolicy {
    fn default() -> Self {
        ScalePolicy::Spectral { margin: 1.0 }
    }
}

pub const COALESCE_REL_TOL: f64 = 1e-9;

/// Normalized spectrum with squared reference overlaps per distinct level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    energies: Vec<f64>,
    overlaps_sq: Vec<f64>,
    scale: f64,
    metadata: Value,
}

#[derive(Serialize, Deserialize)]
struct SpectralModelJson {
    energies: Vec<f64>,
    overlaps_sq: Vec<f64>,
    gap: Option<f64>,
    scale: f64,
    #[serde(default)]
    metadata: Value,
}

impl Serialize for SpectralModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g = self.gap();
        SpectralModelJson {
            energies: self.energies.clone(),
            overlaps_sq: self.overlaps_sq.clone(),
            gap: g.is_finite().then_some(g),
            scale: self.scale,
            metadata: self.metadata.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SpectralModelJson::deserialize(d)?;
        let m = SpectralModel::with_scale(j.energies, j.overlaps_sq, j.scale, j.metadata)
            .map_err(serde::de::Error::custom)?;
        if let Some(g) = j.gap {
            if (g - m.gap()).abs() > 1e-9 * g.abs().max(1e-300) {
                return Err(serde::de::Error::custom(format!("stored gap {g} disagrees with energies ({})", m.gap())));
            }
        }
        Ok(m)
    }
}

impl SpectralModel {
    fn with_scale(energies: Vec<f64>, overlaps_sq: Vec<f64>, scale: f64, metadata: Value) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::Invariant("model needs at least one level".into()));
        }
        if energies.len() != overlaps_sq.len() {
            return Err(Error::Invariant(format!(
                "energies ({}) and overlaps_sq ({}) differ in length",
                energies.len(),
                overlaps_sq.len()
            )));
        }
        if energies.iter().any(|e| !e.is_finite() || e.abs() > 1.0 + 1e-12) {
            return Err(Error::Invariant("energies must lie within [-1, 1]".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invariant("energies must be non-decreasing".into()));
        }
        if overlaps_sq.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Invariant("overlaps_sq must be non-negative".into()));
        }
        let total: f64 = overlaps_sq.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant(format!("overlaps_sq sum to {total}, not 1")));
        }
        if energies.len() > 1 && !(energies[1] > energies[0]) {
            return Err(Error::Invariant("gap E1 - E0 must be positive".into()));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::Invariant(format!("scale must be positive, got {scale}")));
        }
        let energies = energies.into_iter().map(|e| e.clamp(-1.0, 1.0)).collect();
        Ok(SpectralModel { energies, overlaps_sq, scale, metadata })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn overlaps_sq(&self) -> &[f64] {
        &self.overlaps_sq
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// E1 - E0; infinite for a single-level model.
    pub fn gap(&self) -> f64 {
        if self.energies.len() > 1 {
            self.energies[1] - self.energies[0]
        } else {
            f64::INFINITY
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn metadata(&self) -> &Value {
        &self.metadata
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_overlap(&self) -> f64 {
        self.overlaps_sq[0]
    }

    pub fn with_metadata(mut self, metadata: Value) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("model JSON: {e}")))
    }
}

/// Validating constructor for arbitrary spectra in normalized units.
pub fn synthetic_model(energies: Vec<f64>, overlaps_sq: Vec<f64>) -> Result<SpectralModel> {
    SpectralModel::with_scale(energies, overlaps_sq, 1.0, serde_json::json!({"source": "synthetic"}))
}

/// Seeded random model with `levels` distinct energies in [-1, 1] and
/// positive weights normalized to 1.
pub fn random_model(levels: usize, seed: u64) -> Result<SpectralModel> {
    use rand::{Rng, SeedableRng};
    if levels == 0 {
        return invalid("need at least one level");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<f64> = (0..levels).map(|_| rng.random_range(-1.0..1.0)).collect();
    e.sort_by(f64::total_cmp);
    e.dedup();
    let mut w: Vec<f64> = (0..e.len()).map(|_| rng.random_range(1e-3..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let mut m = synthetic_model(e, w)?;
    m.metadata = serde_json::json!({"source": "random", "seed": seed});
    Ok(m)
}

/// Diagonalize, project the reference, coalesce near-degenerate levels and normalize.
pub fn spectral_model_from_matrix(
    h: &HermitianMatrix,
    reference: &[C64],
    policy: ScalePolicy,
    metadata: Value,
) -> Result<SpectralModel> {
    let eig = hermitian_eig(h)?;
    let n = h.dim();
    if reference.len() != n {
        return Err(Error::DimensionMismatch(format!("reference has {} entries, matrix {n}", reference.len())));
    }
    let weights: Vec<f64> =
        (0..n).map(|k| (0..n).map(|i| eig.vectors[(i, k)].conj() * reference[i]).sum::<C64>().norm_sqr()).collect();
    let emin = eig.values[0];
    let emax = eig.values[n - 1];
    let radius = emin.abs().max(emax.abs());
    let tol = COALESCE_REL_TOL * (emax - emin);
    let mut levels: Vec<(f64, f64, usize)> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for k in 0..n {
        let e = eig.values[k];
        match levels.last_mut() {
            Some(last) if e - prev <= tol => {
                last.0 += e;
                last.1 += weights[k];
                last.2 += 1;
            }
            _ => levels.push((e, weights[k], 1)),
        }
        prev = e;
    }
    let lambda = match policy {
        ScalePolicy::Spectral { margin } => {
            if !(margin >= 1.0) {
                return invalid(format!("spectral margin must be >= 1, got {margin}"));
            }
            margin * radius
        }
        ScalePolicy::Explicit { lambda } => {
            if !(lambda >= radius * (1.0 - 1e-12)) {
                return invalid(format!("explicit lambda {lambda} is below the spectral radius {radius}"));
            }
            lambda
        }
    };
    if !(lambda > 0.0) {
        return invalid("spectrum is identically zero; cannot normalize");
    }
    let energies: Vec<f64> = levels.iter().map(|(s, _, c)| (s / *c as f64 / lambda).clamp(-1.0, 1.0)).collect();
    let total: f64 = levels.iter().map(|l| l.1).sum();
    let overlaps: Vec<f64> = levels.iter().map(|l| l.1 / total).collect();
    let mut meta = metadata;
    if let Value::Object(map) = &mut meta {
        map.insert("dimension".into(), Value::from(n));
        map.insert("raw_min".into(), Value::from(emin));
        map.insert("raw_max".into(), Value::from(emax));
        map.insert("degeneracies".into(), Value::from(levels.iter().map(|l| l.2).collect::<Vec<_>>()));
    }
    SpectralModel::with_scale(energies, overlaps, lambda, meta)
}

pub fn spectral_model(spec: &HubbardSpec, reference: &ReferenceState, policy: ScalePolicy) -> Result<SpectralModel> {
    let ham = build_hubbard(spec)?;
    let amps = reference.amplitudes(ham.basis.len())?;
    let meta = serde_json::json!({ "source": "hubbard", "spec": spec });
    spectral_model_from_matrix(&ham.matrix, &amps, policy, meta)
}

/// Convenience: Hubbard model with a Neel reference state.
pub fn hubbard_neel_model(
    spec: &HubbardSpec,
    pattern: NeelPattern,
    start: Spin,
    policy: ScalePolicy,
) -> Result<SpectralModel> {
    let ham = build_hubbard(spec)?;
    let reference = neel_state(spec, &ham.basis, pattern, start)?;
    let amps = reference.amplitudes(ham.basis.len())?;
    let (up, down) = neel_occupation(spec, pattern, start)?;
    let meta = serde_json::json!({
        "source": "hubbard",
        "spec": spec,
        "reference": { "pattern": pattern, "start": start, "up_mask": up, "down_mask": down },
    });
    spectral_model_from_matrix(&ham.matrix, &amps, policy, meta)
}
