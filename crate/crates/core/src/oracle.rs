//! Dense state-vector reference for small registers.
//!
//! Basis index bit `q` is the computational value of qubit `q`. Reduced
//! matrices on a qubit subset use the same convention after relabelling the
//! subset in ascending order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bipartite::Bipartition;
use crate::error::{Error, Result};
use crate::gf2::{get_bit, BitMatrix};
use crate::measurement::{branches, build_trace_out_plan, trace_out, Sign, TraceOutPlan};
use crate::pauli::{PauliOperator, QubitSet};
use crate::rng::rng_for;
use crate::stab_group::StabilizerGroup;
use crate::superadditivity::{select_measurement_ops, FourWayPartition, SsaReport, TracedPart};

pub const MAX_STATE_QUBITS: usize = 14;
pub const MAX_OPERATOR_QUBITS: usize = 12;
pub const MAX_SAMPLER_QUBITS: usize = 6;

const NORM_TOL: f64 = 1e-12;

fn check_cap(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::OracleLimit { what, n, max });
    }
    Ok(())
}

fn i_pow(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(x, z, i^phase)` of a Pauli on at most 64 qubits.
fn pauli_masks(p: &PauliOperator) -> (usize, usize, Complex64) {
    let x = p.x_bits().first().copied().unwrap_or(0) as usize;
    let z = p.z_bits().first().copied().unwrap_or(0) as usize;
    (x, z, i_pow(p.phase_exp()))
}

/// Applies `p` to `amps`: `X^x Z^z |b> = (-1)^{z·b} |b ⊕ x>`.
fn apply_pauli_to(p: &PauliOperator, amps: &[Complex64]) -> Vec<Complex64> {
    let (x, z, c) = pauli_masks(p);
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (b, a) in amps.iter().enumerate() {
        let s = if (z & b).count_ones() % 2 == 1 { -c } else { c };
        out[b ^ x] = a * s;
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    /// Validates length and unit norm.
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_cap("state", n, MAX_STATE_QUBITS)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    /// Normalizes `amps` and fixes the gauge. `None` for the zero vector.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Option<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        let mut s = Self { n, amps };
        s.fix_gauge();
        Some(s)
    }

    /// First amplitude above `1e-12` in modulus becomes positive real.
    fn fix_gauge(&mut self) {
        if let Some(a) = self.amps.iter().find(|a| a.norm() > 1e-12).copied() {
            let phase = a.conj() / a.norm();
            self.amps.iter_mut().for_each(|x| *x *= phase);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn apply_pauli(&self, p: &PauliOperator) -> Result<DenseState> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.n(),
            });
        }
        Ok(Self {
            n: self.n,
            amps: apply_pauli_to(p, &self.amps),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩| ≥ 1 - tol`.
    pub fn equal_up_to_phase(&self, other: &DenseState, tol: f64) -> bool {
        self.n == other.n && self.inner(other).norm() >= 1.0 - tol
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        &v * v.adjoint()
    }

    /// Reduced density matrix on `keep`.
    pub fn partial_trace(&self, keep: &QubitSet) -> Result<DMatrix<Complex64>> {
        if keep.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: keep.n(),
            });
        }
        let m = amplitude_matrix(self, keep);
        Ok(&m * m.adjoint())
    }
}

/// Rows indexed by `rows` qubits, columns by the rest.
fn amplitude_matrix(state: &DenseState, rows: &QubitSet) -> DMatrix<Complex64> {
    let rest = rows.complement();
    let (ri, ci) = (rows.indices(), rest.indices());
    let mut m = DMatrix::zeros(1 << ri.len(), 1 << ci.len());
    for (b, a) in state.amps.iter().enumerate() {
        let r = gather(b, ri);
        let c = gather(b, ci);
        m[(r, c)] = *a;
    }
    m
}

/// Packs bits `qubits[i]` of `b` into bit `i`.
fn gather(b: usize, qubits: &[usize]) -> usize {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | (((b >> q) & 1) << i))
}

/// Sum of Pauli terms, expanded into a matrix only on demand.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    n: usize,
    terms: Vec<(Complex64, PauliOperator)>,
}

impl DenseOperator {
    pub fn new(n: usize, terms: Vec<(Complex64, PauliOperator)>) -> Result<Self> {
        check_cap("operator", n, MAX_OPERATOR_QUBITS)?;
        if let Some((_, p)) = terms.iter().find(|(_, p)| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n(),
            });
        }
        Ok(Self { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(Complex64, PauliOperator)] {
        &self.terms
    }

    pub fn apply(&self, state: &DenseState) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); state.amps.len()];
        for (c, p) in &self.terms {
            for (o, v) in out.iter_mut().zip(apply_pauli_to(p, &state.amps)) {
                *o += c * v;
            }
        }
        out
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &self.terms {
            let (x, z, ph) = pauli_masks(p);
            for b in 0..dim {
                let s = if (z & b).count_ones() % 2 == 1 {
                    -ph
                } else {
                    ph
                };
                m[(b ^ x, b)] += c * s;
            }
        }
        m
    }
}

/// A basis state `|b>` with nonzero overlap with the stabilized space: the
/// `Z`-type elements `±Z^z` of the group fix `z·b`.
fn support_basis_index(s: &StabilizerGroup) -> Result<usize> {
    let n = s.n();
    let gens = s.generators();
    let k = gens.len();
    let mut xt = BitMatrix::new(k);
    for q in 0..n {
        let mut row = vec![0u64; k.div_ceil(64).max(1)];
        for (i, g) in gens.iter().enumerate() {
            if get_bit(g.x_bits(), q) {
                row[i / 64] |= 1 << (i % 64);
            }
        }
        xt.push_row(&row);
    }
    let mut zrows = BitMatrix::new(n);
    let mut rhs = Vec::new();
    for combo in xt.nullspace() {
        let mut p = PauliOperator::identity(n);
        for (i, g) in gens.iter().enumerate() {
            if get_bit(&combo, i) {
                p.mul_assign(g);
            }
        }
        zrows.push_row(p.z_bits());
        rhs.push(p.is_negative());
    }
    if zrows.rows() == 0 {
        return Ok(0);
    }
    let sol = zrows.solve(&rhs).ok_or(Error::Contradiction)?;
    Ok((0..n).filter(|&q| get_bit(&sol, q)).map(|q| 1 << q).sum())
}

/// The state fixed by every generator of a maximal group.
pub fn statevector(s: &StabilizerGroup) -> Result<DenseState> {
    check_cap("state", s.n(), MAX_STATE_QUBITS)?;
    if !s.is_maximal() {
        return Err(Error::NotMaximal {
            rank: s.rank(),
            n: s.n(),
        });
    }
    let n = s.n();
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
    amps[support_basis_index(s)?] = Complex64::new(1.0, 0.0);
    for g in s.generators() {
        let ga = apply_pauli_to(g, &amps);
        for (a, b) in amps.iter_mut().zip(ga) {
            *a = (*a + b) * 0.5;
        }
    }
    let state = DenseState::normalized(n, amps);
    assert!(state.is_some(), "support basis vector was annihilated");
    Ok(state.unwrap())
}

fn entropy_of_spectrum(eigs: impl Iterator<Item = f64>) -> f64 {
    eigs.filter(|&l| l > 1e-14).map(|l| -l * l.log2()).sum()
}

/// Von Neumann entropy (base 2) of a density matrix.
pub fn matrix_entropy(rho: &DMatrix<Complex64>) -> f64 {
    entropy_of_spectrum(rho.clone().symmetric_eigenvalues().iter().copied())
}

/// Entanglement entropy across `part`, in ebits.
pub fn schmidt_entropy(v: &DenseState, part: &Bipartition) -> Result<f64> {
    if part.n() != v.n {
        return Err(Error::DimensionMismatch {
            expected: v.n,
            found: part.n(),
        });
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm));
    }
    let side = if part.a().len() <= part.b().len() {
        part.a()
    } else {
        part.b()
    };
    let m = amplitude_matrix(v, side);
    Ok(matrix_entropy(&(&m * m.adjoint())))
}

/// `(1/2^n) Σ_{g∈H} g`.
pub fn code_projector_matrix(h: &StabilizerGroup) -> Result<DenseOperator> {
    check_cap("operator", h.n(), MAX_OPERATOR_QUBITS)?;
    let c = Complex64::new(1.0 / (1u64 << h.n()) as f64, 0.0);
    DenseOperator::new(h.n(), h.elements().into_iter().map(|g| (c, g)).collect())
}

/// Partial trace of an `n`-qubit matrix onto `keep`.
pub fn partial_trace_matrix(rho: &DMatrix<Complex64>, keep: &QubitSet) -> DMatrix<Complex64> {
    let n = keep.n();
    let rest = keep.complement();
    let (ki, ri) = (keep.indices(), rest.indices());
    let dk = 1usize << ki.len();
    let mut out = DMatrix::zeros(dk, dk);
    for r in 0..1usize << ri.len() {
        let base: usize = ri
            .iter()
            .enumerate()
            .map(|(i, &q)| ((r >> i) & 1) << q)
            .sum();
        let full = |k: usize| -> usize {
            base + ki
                .iter()
                .enumerate()
                .map(|(i, &q)| ((k >> i) & 1) << q)
                .sum::<usize>()
        };
        for a in 0..dk {
            let fa = full(a);
            for b in 0..dk {
                out[(a, b)] += rho[(fa, full(b))];
            }
        }
    }
    debug_assert_eq!(rho.nrows(), 1 << n);
    out
}

/// Weighted-average entanglement entropy of the decomposition given by the
/// columns of `vecs` (unnormalized; weight = squared norm).
fn decomposition_average(vecs: &DMatrix<Complex64>, n: usize, part: &Bipartition) -> f64 {
    let mut avg = 0.0;
    for col in vecs.column_iter() {
        let w: f64 = col.iter().map(|a| a.norm_sqr()).sum();
        if w < 1e-14 {
            continue;
        }
        let amps: Vec<Complex64> = col.iter().map(|a| a / w.sqrt()).collect();
        let state = DenseState { n, amps };
        avg += w * schmidt_entropy(&state, part).expect("normalized column");
    }
    avg
}

/// Haar-like random unitary from the QR factor of a complex Gaussian matrix.
fn random_unitary(dim: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.qr().q()
}

/// Upper-bound probe of the entanglement of formation of the normalized
/// projector onto the code space of `h`: the least average entanglement over
/// `trials` pure-state decompositions.
///
/// Decompositions of `ρ = Σ_k λ_k |v_k><v_k|` are `√p_j |ψ_j> = Σ_k U_jk √λ_k
/// |v_k>` for isometries `U`. Trial 0 uses the computational-basis
/// decomposition `ρ|b>`; the others draw random unitaries seeded by
/// `(seed, trial)`.
pub fn decomposition_entropy_sampler(
    h: &StabilizerGroup,
    part: &Bipartition,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let n = h.n();
    check_cap("sampler", n, MAX_SAMPLER_QUBITS)?;
    if part.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: part.n(),
        });
    }
    let rho = code_projector_matrix(h)?.to_matrix();
    let eig = rho.clone().symmetric_eigen();
    let range: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-9)
        .collect();
    let r = range.len();
    let dim = 1usize << n;
    // Columns √λ_k |v_k>.
    let base = DMatrix::from_fn(dim, r, |row, k| {
        let i = range[k];
        eig.eigenvectors[(row, i)] * eig.eigenvalues[i].sqrt()
    });
    let mut best = f64::INFINITY;
    for t in 0..trials.max(1) {
        let vecs = if t == 0 {
            // √ρ = √r·ρ for a flat spectrum.
            &rho * Complex64::new((r as f64).sqrt(), 0.0)
        } else {
            let u = random_unitary(r, &mut rng_for(seed, t as u64));
            &base * u.transpose()
        };
        best = best.min(decomposition_average(&vecs, n, part));
    }
    Ok(best)
}

/// Uniform mixture `(1/m) Σ |ψ><ψ|`.
pub fn uniform_mixture(states: &[DenseState]) -> Option<DMatrix<Complex64>> {
    let first = states.first()?;
    let dim = first.amps.len();
    let mut out = DMatrix::zeros(dim, dim);
    for s in states {
        out += s.density_matrix();
    }
    Some(out / Complex64::new(states.len() as f64, 0.0))
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `(I + s·m)/2 |ψ>` renormalized, or `None` if the outcome has probability 0.
pub fn dense_measure(
    state: &DenseState,
    m: &PauliOperator,
    sign: Sign,
) -> Result<Option<DenseState>> {
    let ma = state.apply_pauli(m)?;
    let s = sign.value() as f64;
    let amps = state
        .amps
        .iter()
        .zip(ma.amps)
        .map(|(a, b)| (a + b * s) * 0.5)
        .collect();
    Ok(DenseState::normalized(state.n, amps))
}

/// Dense comparison of the branch decomposition of a trace-out plan with
/// the partial trace of the full state.
#[derive(Clone, Debug)]
pub struct BranchCheck {
    pub branch_count: usize,
    /// Largest entrywise deviation of the uniform branch mixture from the
    /// partial trace.
    pub max_deviation: f64,
    /// Entanglement entropy of each branch across `kept_part`.
    pub entropies: Vec<f64>,
    /// All branches agree with the phase-agnostic traced-out group.
    pub same_group: bool,
}

pub fn branch_reconstruction(
    group: &StabilizerGroup,
    plan: &TraceOutPlan,
    kept_part: &Bipartition,
) -> Result<BranchCheck> {
    let full = statevector(group)?;
    let reduced = full.partial_trace(&plan.kept)?;
    let groups = branches(group, plan)?;
    let shared = trace_out(group, plan)?;
    let same_group = groups.iter().all(|g| g.same_up_to_phases(&shared));
    let states = groups.iter().map(statevector).collect::<Result<Vec<_>>>()?;
    let mixture = uniform_mixture(&states).ok_or_else(|| {
        Error::InvariantViolated("measurement plan has no feasible branch".into())
    })?;
    let entropies = states
        .iter()
        .map(|s| schmidt_entropy(s, kept_part))
        .collect::<Result<Vec<_>>>()?;
    Ok(BranchCheck {
        branch_count: states.len(),
        max_deviation: max_abs_diff(&mixture, &reduced),
        entropies,
        same_group,
    })
}

/// Dense cross-check of one super-additivity instance: the global entropy
/// matches `e/2`, and for each traced partition the selected branch
/// decomposition reproduces the reduced state with every branch carrying
/// exactly `e_i/2` ebits. Returns a description of the first mismatch.
pub fn cross_check_ssa(
    group: &StabilizerGroup,
    fw: &FourWayPartition,
    report: &SsaReport,
) -> Result<(), String> {
    let err = |e: Error| e.to_string();
    let state = statevector(group).map_err(err)?;
    let s = schmidt_entropy(&state, &fw.bipartition()).map_err(err)?;
    if (s - report.e_global as f64 / 2.0).abs() > 1e-6 {
        return Err(format!("dense entropy {s} but e_AB = {}", report.e_global));
    }
    for (traced, e) in [
        (TracedPart::Part2, report.e1),
        (TracedPart::Part1, report.e2),
    ] {
        let sel = select_measurement_ops(group, fw, traced).map_err(err)?;
        let plan = build_trace_out_plan(group, &fw.bipartition(), fw.traced(traced), &sel.ops)
            .map_err(err)?;
        let check =
            branch_reconstruction(group, &plan, &fw.kept_bipartition(traced)).map_err(err)?;
        if check.max_deviation > 1e-10 {
            return Err(format!(
                "branch mixture deviates from the partial trace by {:e} ({traced:?})",
                check.max_deviation
            ));
        }
        if !check.same_group {
            return Err(format!("branches do not share one group ({traced:?})"));
        }
        if let Some(bad) = check
            .entropies
            .iter()
            .find(|&&x| (x - e as f64 / 2.0).abs() > 1e-6)
        {
            return Err(format!("branch entropy {bad} but e = {e} ({traced:?})"));
        }
    }
    Ok(())
}

/// Mixture of the sign branches of a maximal completion of `h`.
#[derive(Clone, Debug)]
pub struct WitnessMixture {
    pub rho: DMatrix<Complex64>,
    /// Average entanglement entropy of the branch states across the cut.
    pub average_entropy: f64,
    pub branch_count: usize,
}

/// Uniform mixture over every sign assignment of the generators of
/// `witness` beyond the first `h.rank()` (which must generate `h`).
pub fn witness_mixture(
    h: &StabilizerGroup,
    witness: &StabilizerGroup,
    part: &Bipartition,
) -> Result<WitnessMixture> {
    let k = h.rank();
    let gens = witness.generators();
    if !witness.is_maximal()
        || gens.len() < k
        || !gens[..k].iter().zip(h.generators()).all(|(a, b)| a == b)
    {
        return Err(Error::InvalidMixture(
            "witness does not extend the generators of h".into(),
        ));
    }
    let extra = gens.len() - k;
    let mut states = Vec::with_capacity(1 << extra);
    let mut total = 0.0;
    for bits in 0usize..1 << extra {
        let flipped: Vec<PauliOperator> = gens
            .iter()
            .enumerate()
            .map(|(i, g)| {
                if i >= k && (bits >> (i - k)) & 1 == 1 {
                    g.negated()
                } else {
                    g.clone()
                }
            })
            .collect();
        let state = statevector(&StabilizerGroup::new(witness.n(), flipped)?)?;
        total += schmidt_entropy(&state, part)?;
        states.push(state);
    }
    Ok(WitnessMixture {
        rho: uniform_mixture(&states).expect("at least one branch"),
        average_entropy: total / states.len() as f64,
        branch_count: states.len(),
    })
}
