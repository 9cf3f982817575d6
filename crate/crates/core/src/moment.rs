//! Compile almost-quantum moment-matrix membership into semidefinite
//! feasibility, and optimize linear functionals over the same feasible set.
//!
//! The moment matrix is indexed by the almost-quantum word set. Entries whose
//! word products agree (modulo the symmetry operations) share one variable,
//! null products are pinned to zero, and the data row Γ(∅, ·) is pinned to
//! the marginals of the correlation (scalar case) or of the assemblage
//! (block case). Membership is formulated as max-λmin so the optimum doubles
//! as a robustness margin.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, RMatrix};
use crate::quantum::{check_nonsignalling, Assemblage, Correlation, NS_TOL};
use crate::sdp::{
    embed_entry, embed_hermitian, solve, unembed_hermitian, SdpProblem, SdpSolution,
    SolverOptions, SolverStatus, SparseSym,
};
use crate::words::{
    generate_aq_words_layout, product_key, PartyLayout, ProductKey, Scenario, Word,
    DEFAULT_WORD_CAP,
};

/// Scalar entries (Bell scenarios) or d×d blocks (EPR scenarios).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    Scalar,
    Block(usize),
}

impl MomentKind {
    pub fn block_dim(&self) -> usize {
        match self {
            MomentKind::Scalar => 1,
            MomentKind::Block(d) => *d,
        }
    }
}

/// Square array indexed by the almost-quantum word set, with scalar or block
/// entries stored as one (n·d)×(n·d) complex matrix.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub layout: PartyLayout,
    pub words: Vec<Word>,
    pub kind: MomentKind,
    pub entries: CMatrix,
}

impl MomentMatrix {
    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn block_dim(&self) -> usize {
        self.kind.block_dim()
    }

    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        self.entries.block(i, j, self.block_dim())
    }

    pub fn scalar(&self, i: usize, j: usize) -> c64 {
        debug_assert_eq!(self.kind, MomentKind::Scalar);
        self.entries[(i, j)]
    }

    pub fn word_index(&self, w: &Word) -> Option<usize> {
        self.words.iter().position(|x| x == w)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.entries.min_eigenvalue()
    }

    /// Largest violation of the structural constraints: Hermiticity, equal
    /// entries on equal product keys, zero on null products, and unit trace
    /// of the (∅,∅) block.
    pub fn structure_violation(&self) -> f64 {
        let n = self.n_words();
        let mut worst = self.entries.hermitian_deviation();
        let mut seen: HashMap<Word, (usize, usize, bool)> = HashMap::new();
        for i in 0..n {
            for j in 0..n {
                match product_key(&self.words[i], &self.words[j]) {
                    ProductKey::Null => {
                        worst = worst.max(self.block(i, j).max_abs());
                    }
                    ProductKey::Key(k) => {
                        let rep = k.clone().min(k.dagger());
                        let conj = rep != k;
                        match seen.get(&rep) {
                            None => {
                                seen.insert(rep, (i, j, conj));
                            }
                            Some(&(pi, pj, pconj)) => {
                                let a = if conj {
                                    self.block(i, j).adjoint()
                                } else {
                                    self.block(i, j)
                                };
                                let b = if pconj {
                                    self.block(pi, pj).adjoint()
                                } else {
                                    self.block(pi, pj)
                                };
                                worst = worst.max(a.sub(&b).max_abs());
                            }
                        }
                    }
                }
            }
        }
        let tr = self.block(0, 0).trace();
        worst = worst.max((tr - c64::new(1.0, 0.0)).norm());
        worst
    }
}

#[derive(Debug, Clone)]
struct ClassInfo {
    rep: Word,
    self_adjoint: bool,
    /// rep has at most one letter per party, so its value is pinned by data.
    data: bool,
    /// (row word, column word, entry carries the adjoint of the class block)
    positions: Vec<(usize, usize, bool)>,
}

/// Equal-product classes over the word set of a layout.
#[derive(Debug, Clone)]
pub struct MomentStructure {
    pub layout: PartyLayout,
    pub words: Vec<Word>,
    classes: Vec<ClassInfo>,
    /// class id of each (i,j) pair, or usize::MAX for null pairs
    pair_class: Vec<usize>,
}

impl MomentStructure {
    pub fn build(layout: &PartyLayout, cap: usize) -> Result<Self> {
        let words = generate_aq_words_layout(layout, cap)?;
        let n = words.len();
        let mut classes: Vec<ClassInfo> = Vec::new();
        let mut by_rep: HashMap<Word, usize> = HashMap::new();
        let mut pair_class = vec![usize::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                match product_key(&words[i], &words[j]) {
                    ProductKey::Null => {}
                    ProductKey::Key(k) => {
                        let dag = k.dagger();
                        let (rep, conj) = if dag < k { (dag, true) } else { (k, false) };
                        let id = *by_rep.entry(rep.clone()).or_insert_with(|| {
                            classes.push(ClassInfo {
                                self_adjoint: rep == rep.dagger(),
                                data: rep.is_single_per_party(),
                                rep,
                                positions: Vec::new(),
                            });
                            classes.len() - 1
                        });
                        classes[id].positions.push((i, j, conj));
                        pair_class[i * n + j] = id;
                    }
                }
            }
        }
        Ok(MomentStructure {
            layout: layout.clone(),
            words,
            classes,
            pair_class,
        })
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn class_of(&self, i: usize, j: usize) -> Option<usize> {
        let v = self.pair_class[i * self.words.len() + j];
        (v != usize::MAX).then_some(v)
    }

    fn class_by_rep(&self, rep: &Word) -> Option<usize> {
        self.classes.iter().position(|c| &c.rep == rep)
    }
}

/// A compiled membership problem: the embedded SDP plus everything needed to
/// reassemble a moment matrix from a solution vector.
#[derive(Debug, Clone)]
pub struct CompiledMembership {
    pub structure: MomentStructure,
    pub kind: MomentKind,
    pub problem: SdpProblem,
    complex_base: CMatrix,
    complex_dirs: Vec<Vec<(usize, usize, c64)>>,
    embedded: bool,
}

impl CompiledMembership {
    /// Moment matrix achieved by a free-variable vector.
    pub fn moment_from_y(&self, y: &[f64]) -> MomentMatrix {
        let mut m = self.complex_base.clone();
        for (dir, &w) in self.complex_dirs.iter().zip(y) {
            if w == 0.0 {
                continue;
            }
            for &(p, q, v) in dir {
                m[(p, q)] += v * w;
            }
        }
        MomentMatrix {
            layout: self.structure.layout.clone(),
            words: self.structure.words.clone(),
            kind: self.kind,
            entries: m,
        }
    }

    /// Dual witness in block form from the solver's multiplier matrix.
    pub fn witness_from_dual(&self, z: &RMatrix) -> CMatrix {
        if self.embedded {
            unembed_hermitian(z)
        } else {
            CMatrix::from_fn(z.rows, z.cols, |i, j| c64::new(z[(i, j)], 0.0))
        }
    }
}

/// Direction parameterisations of one free class: Hermitian blocks carry d²
/// real coordinates, off-diagonal class pairs a full complex block (2d²).
fn push_class_directions(
    class: &ClassInfo,
    d: usize,
    embed: bool,
    n: usize,
    dirs: &mut Vec<SparseSym>,
    complex_dirs: &mut Vec<Vec<(usize, usize, c64)>>,
) {
    let at = |i: usize, r: usize| i * d + r;
    let mut push = |entries: Vec<(usize, usize, c64)>| {
        if embed {
            let mut real = Vec::with_capacity(entries.len() * 2);
            for &(p, q, v) in &entries {
                embed_entry(&mut real, n * d, p, q, v);
            }
            dirs.push(SparseSym::from_entries(real));
        } else {
            let real: Vec<(u32, u32, f64)> = entries
                .iter()
                .map(|&(p, q, v)| {
                    debug_assert!(v.im == 0.0);
                    (p as u32, q as u32, v.re)
                })
                .collect();
            dirs.push(SparseSym::from_entries(real));
        }
        complex_dirs.push(entries);
    };

    if !embed {
        // real symmetric scalar matrix: one shared variable covers the class
        // and its dagger partner
        let entries: Vec<(usize, usize, c64)> = class
            .positions
            .iter()
            .map(|&(i, j, _)| (i, j, c64::new(1.0, 0.0)))
            .collect();
        push(entries);
        return;
    }

    if class.self_adjoint {
        // Hermitian block: d real diagonal + d(d-1)/2 complex off-diagonal
        for r in 0..d {
            let mut entries = Vec::new();
            for &(i, j, _) in &class.positions {
                entries.push((at(i, r), at(j, r), c64::new(1.0, 0.0)));
            }
            push(entries);
        }
        for r in 0..d {
            for s in (r + 1)..d {
                let mut sym = Vec::new();
                let mut asym = Vec::new();
                for &(i, j, _) in &class.positions {
                    sym.push((at(i, r), at(j, s), c64::new(1.0, 0.0)));
                    sym.push((at(i, s), at(j, r), c64::new(1.0, 0.0)));
                    asym.push((at(i, r), at(j, s), c64::new(0.0, 1.0)));
                    asym.push((at(i, s), at(j, r), c64::new(0.0, -1.0)));
                }
                push(sym);
                push(asym);
            }
        }
    } else {
        // full complex block B on the class, B† on the dagger positions
        for r in 0..d {
            for s in 0..d {
                let mut re = Vec::new();
                let mut im = Vec::new();
                for &(i, j, conj) in &class.positions {
                    if !conj {
                        re.push((at(i, r), at(j, s), c64::new(1.0, 0.0)));
                        im.push((at(i, r), at(j, s), c64::new(0.0, 1.0)));
                    } else {
                        re.push((at(i, s), at(j, r), c64::new(1.0, 0.0)));
                        im.push((at(i, s), at(j, r), c64::new(0.0, -1.0)));
                    }
                }
                push(re);
                push(im);
            }
        }
    }
}

fn compile_membership(
    layout: &PartyLayout,
    kind: MomentKind,
    cap: usize,
    mut pin: impl FnMut(&Word) -> CMatrix,
) -> Result<CompiledMembership> {
    let structure = MomentStructure::build(layout, cap)?;
    let d = kind.block_dim();
    let n = structure.n_words();
    let embed = matches!(kind, MomentKind::Block(_));

    let mut base_c = CMatrix::zeros(n * d, n * d);
    let mut dirs: Vec<SparseSym> = Vec::new();
    let mut complex_dirs: Vec<Vec<(usize, usize, c64)>> = Vec::new();
    for class in &structure.classes {
        if class.data {
            let block = pin(&class.rep);
            debug_assert!(block.is_hermitian(1e-7));
            for &(i, j, _) in &class.positions {
                base_c.set_block(i, j, d, &block);
            }
        } else {
            push_class_directions(class, d, embed, n, &mut dirs, &mut complex_dirs);
        }
    }

    let base = if embed {
        embed_hermitian(&base_c)?
    } else {
        RMatrix::from_fn(n, n, |i, j| base_c[(i, j)].re)
    };
    // directions have pairwise disjoint supports by construction (one class
    // per position, one block coordinate per parameter), which is what makes
    // them linearly independent; verified here in debug builds
    #[cfg(debug_assertions)]
    {
        let mut seen = std::collections::HashSet::new();
        for dir in &dirs {
            for &(p, q, _) in &dir.entries {
                debug_assert!(seen.insert((p, q)), "direction supports collide at ({p},{q})");
            }
        }
    }
    let m = dirs.len();
    Ok(CompiledMembership {
        structure,
        kind,
        problem: SdpProblem {
            dim: base.rows,
            base,
            directions: dirs,
            objective: vec![0.0; m],
            objective_shift: 0.0,
            lambda_slack: true,
            equalities: vec![],
        },
        complex_base: base_c,
        complex_dirs,
        embedded: embed,
    })
}

/// Compile Bell almost-quantum membership of a correlation: a real symmetric
/// moment matrix over the word set of all parties, with Γ(∅,∅)=1, the data
/// row pinned to the marginals, equal-product entries shared, and null
/// entries zero.
pub fn compile_bell(corr: &Correlation) -> Result<CompiledMembership> {
    compile_bell_capped(corr, DEFAULT_WORD_CAP)
}

/// [`compile_bell`] with an explicit word-set cap.
pub fn compile_bell_capped(corr: &Correlation, cap: usize) -> Result<CompiledMembership> {
    let ns = corr.ns_violation();
    if ns > NS_TOL {
        return Err(Error::invalid(format!(
            "correlation is signalling (violation {ns:.3e}); marginals are ill-defined"
        )));
    }
    compile_membership(&corr.layout, MomentKind::Scalar, cap, |rep| {
        if rep.is_empty() {
            return CMatrix::identity(1);
        }
        let parties: Vec<usize> = rep.letters().iter().map(|l| l.party).collect();
        let outs: Vec<usize> = rep.letters().iter().map(|l| l.output).collect();
        let ins: Vec<usize> = rep.letters().iter().map(|l| l.input).collect();
        let p = corr.marginal_prob(&parties, &outs, &ins);
        CMatrix::diag(&[p])
    })
}

/// Compile EPR almost-quantum membership of an assemblage: a block moment
/// matrix over the black-box word set with Γ(∅,∅)=ρ_R and the data row
/// pinned to the marginal assemblage elements, real-embedded for the solver.
pub fn compile_epr(assemblage: &Assemblage) -> Result<CompiledMembership> {
    compile_epr_capped(assemblage, DEFAULT_WORD_CAP)
}

/// [`compile_epr`] with an explicit word-set cap.
pub fn compile_epr_capped(assemblage: &Assemblage, cap: usize) -> Result<CompiledMembership> {
    let report = check_nonsignalling(assemblage, NS_TOL);
    if !report.ok {
        return Err(Error::invalid(format!(
            "assemblage fails the non-signalling preconditions: {report}"
        )));
    }
    let d = assemblage.scenario.bob_dim;
    compile_membership(
        &assemblage.scenario.layout(),
        MomentKind::Block(d),
        cap,
        |rep| {
            let parties: Vec<usize> = rep.letters().iter().map(|l| l.party).collect();
            let outs: Vec<usize> = rep.letters().iter().map(|l| l.output).collect();
            let ins: Vec<usize> = rep.letters().iter().map(|l| l.input).collect();
            assemblage.marginal_unchecked(&parties, &outs, &ins)
        },
    )
}

/// Verdict of a membership solve.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub feasible: bool,
    pub t_star: f64,
    pub certificate: MomentMatrix,
    /// Dual witness functional, populated on infeasible verdicts.
    pub witness: Option<CMatrix>,
    pub solution: SdpSolution,
}

/// Decide membership: maximize the smallest eigenvalue over the free
/// variables; feasible iff t_star ≥ −feas_tol.
pub fn membership(compiled: &CompiledMembership, opts: &SolverOptions) -> Result<MembershipReport> {
    let sol = solve(&compiled.problem, opts)?;
    if sol.status != SolverStatus::Optimal {
        return Err(Error::SolverFailure {
            iters: sol.iters,
            reason: format!("{:?}", sol.status),
            gap: sol.gap,
            residual: sol.res_primal.max(sol.res_dual),
        });
    }
    let feasible = sol.t_star >= -opts.feas_tol;
    let certificate = compiled.moment_from_y(&sol.y);
    let witness = (!feasible).then(|| compiled.witness_from_dual(&sol.z_mat));
    Ok(MembershipReport {
        feasible,
        t_star: sol.t_star,
        certificate,
        witness,
        solution: sol,
    })
}

/// Convenience: compile and decide EPR membership of an assemblage.
pub fn epr_membership(assemblage: &Assemblage, opts: &SolverOptions) -> Result<MembershipReport> {
    membership(&compile_epr(assemblage)?, opts)
}

/// Convenience: compile and decide Bell membership of a correlation.
pub fn bell_membership(corr: &Correlation, opts: &SolverOptions) -> Result<MembershipReport> {
    membership(&compile_bell(corr)?, opts)
}

/// Linear functional over full joint outcome/input tuples of a Bell scenario.
pub type Functional = BTreeMap<(Vec<usize>, Vec<usize>), f64>;

/// Maximize a linear functional over all valid almost-quantum moment
/// matrices of the scenario: the data entries become variables tied together
/// by marginal-consistency equalities (which encode normalization and
/// no-signalling), and the functional acts on the full-tuple entries.
pub fn maximize_functional(
    scenario: &Scenario,
    coeffs: &Functional,
    opts: &SolverOptions,
) -> Result<f64> {
    let layout = scenario.layout();
    let structure = MomentStructure::build(&layout, DEFAULT_WORD_CAP)?;
    let n = structure.n_words();

    // variable per class except the pinned ∅ class
    let mut var_of_class: Vec<Option<usize>> = vec![None; structure.classes.len()];
    let mut dirs: Vec<SparseSym> = Vec::new();
    let mut base = RMatrix::zeros(n, n);
    for (id, class) in structure.classes.iter().enumerate() {
        if class.rep.is_empty() {
            for &(i, j, _) in &class.positions {
                base[(i, j)] = 1.0;
            }
            continue;
        }
        let entries: Vec<(u32, u32, f64)> = class
            .positions
            .iter()
            .map(|&(i, j, _)| (i as u32, j as u32, 1.0))
            .collect();
        var_of_class[id] = Some(dirs.len());
        dirs.push(SparseSym::from_entries(entries));
    }
    let m = dirs.len();

    // marginal consistency: for every word u, absent party k and input x_k,
    // Σ_a y[u + a|x_k@k] equals y[u] (or 1 when u = ∅)
    let mut equalities: Vec<(Vec<f64>, f64)> = Vec::new();
    for u in &structure.words {
        let present: Vec<usize> = u.letters().iter().map(|l| l.party).collect();
        let u_var = if u.is_empty() {
            None
        } else {
            let id = structure
                .class_by_rep(u)
                .ok_or_else(|| Error::invalid("word class missing"))?;
            var_of_class[id]
        };
        for k in 0..layout.n_parties() {
            if present.contains(&k) {
                continue;
            }
            for x in 0..layout.0[k].n_inputs {
                let mut row = vec![0.0; m];
                let mut rhs = 0.0;
                for a in 0..layout.0[k].n_outputs {
                    let extended =
                        u.concat(&Word::single(crate::words::Letter::new(k, a, x)));
                    let id = structure
                        .class_by_rep(&extended)
                        .ok_or_else(|| Error::invalid("extended word class missing"))?;
                    let var = var_of_class[id].expect("non-empty word has a variable");
                    row[var] += 1.0;
                }
                match u_var {
                    Some(v) => row[v] -= 1.0,
                    None => rhs = 1.0,
                }
                equalities.push((row, rhs));
            }
        }
    }

    // objective over full-tuple words
    let mut objective = vec![0.0; m];
    for ((outs, ins), &c) in coeffs {
        if outs.len() != layout.n_parties() || ins.len() != layout.n_parties() {
            return Err(Error::invalid(
                "functional coefficients must span all parties",
            ));
        }
        let letters: Vec<crate::words::Letter> = (0..layout.n_parties())
            .map(|k| crate::words::Letter::new(k, outs[k], ins[k]))
            .collect();
        let w = crate::words::canonicalize(&letters, &layout)?;
        let id = structure
            .class_by_rep(&w)
            .ok_or_else(|| Error::invalid("functional touches an unknown word"))?;
        match var_of_class[id] {
            Some(v) => objective[v] += c,
            None => {
                // coefficient on the pinned ∅ entry contributes a constant
            }
        }
    }
    let constant: f64 = coeffs
        .iter()
        .filter_map(|((outs, ins), &c)| {
            let letters: Vec<crate::words::Letter> = (0..layout.n_parties())
                .map(|k| crate::words::Letter::new(k, outs[k], ins[k]))
                .collect();
            let w = Word::from_letters(&letters);
            w.is_empty().then_some(c)
        })
        .sum();

    let problem = SdpProblem {
        dim: n,
        base,
        directions: dirs,
        objective,
        objective_shift: constant,
        lambda_slack: false,
        equalities,
    };
    let sol = solve(&problem, opts)?;
    if sol.status != SolverStatus::Optimal {
        return Err(Error::SolverFailure {
            iters: sol.iters,
            reason: format!("{:?}", sol.status),
            gap: sol.gap,
            residual: sol.res_primal.max(sol.res_dual),
        });
    }
    #[cfg(debug_assertions)]
    for (row, rhs) in &problem.equalities {
        let lhs: f64 = row.iter().zip(&sol.y).map(|(a, y)| a * y).sum();
        debug_assert!(
            (lhs - rhs).abs() < 1e-6,
            "equality violated at the optimum: {lhs} vs {rhs}"
        );
    }
    Ok(sol.objective)
}

/// CHSH functional Σ (−1)^{a⊕b+xy} p(ab|xy) over the two-party binary
/// scenario.
pub fn chsh_functional() -> Functional {
    let mut f = Functional::new();
    for x in 0..2usize {
        for y in 0..2usize {
            for a in 0..2usize {
                for b in 0..2usize {
                    let sign = if (a ^ b) == (x & y) { 1.0 } else { -1.0 };
                    f.insert((vec![a, b], vec![x, y]), sign);
                }
            }
        }
    }
    f
}

/// Brute-force local bound of a full-tuple functional over the deterministic
/// strategies of a two-party binary scenario.
pub fn local_bound_2x2(coeffs: &Functional) -> f64 {
    let mut best = f64::NEG_INFINITY;
    // deterministic assignments a(x), b(y) for binary inputs
    for fa in 0..4usize {
        for fb in 0..4usize {
            let a = |x: usize| (fa >> x) & 1;
            let b = |y: usize| (fb >> y) & 1;
            let mut v = 0.0;
            for ((outs, ins), &c) in coeffs {
                if outs[0] == a(ins[0]) && outs[1] == b(ins[1]) {
                    v += c;
                }
            }
            best = best.max(v);
        }
    }
    best
}

/// Export a compiled problem in sparse SDPA format (.dat-s): one PSD block
/// for the matrix inequality, equality rows as paired 1×1 inequalities in a
/// diagonal block, objective negated since SDPA minimizes.
pub fn export_sdpa(problem: &SdpProblem, title: &str) -> String {
    let n = problem.dim;
    let n_eq = problem.equalities.len();
    let m = problem.directions.len() + usize::from(problem.lambda_slack);
    let mut out = String::new();
    out.push_str(&format!("\"{title}\"\n"));
    out.push_str(&format!("{m} = mDIM\n"));
    let nblocks = if n_eq > 0 { 2 } else { 1 };
    out.push_str(&format!("{nblocks} = nBLOCK\n"));
    if n_eq > 0 {
        out.push_str(&format!("{n} -{}\n", 2 * n_eq));
    } else {
        out.push_str(&format!("{n}\n"));
    }
    // SDPA minimizes c·x; we maximize, so negate
    let mut c: Vec<f64> = problem.objective.iter().map(|v| -v).collect();
    if problem.lambda_slack {
        c.push(-1.0);
    }
    out.push_str(
        &c.iter()
            .map(|v| format!("{v}"))
            .collect::<Vec<_>>()
            .join(" "),
    );
    out.push('\n');

    let push_entry = |s: &mut String, mat: usize, blk: usize, i: usize, j: usize, v: f64| {
        if v != 0.0 && i <= j {
            s.push_str(&format!("{mat} {blk} {} {} {v}\n", i + 1, j + 1));
        }
    };

    // F0 = −base (constraint reads Σ x_i F_i − F0 ⪰ 0 = base + Σ y F)
    for i in 0..n {
        for j in i..n {
            push_entry(&mut out, 0, 1, i, j, -problem.base[(i, j)]);
        }
    }
    for (e, (_, b)) in problem.equalities.iter().enumerate() {
        push_entry(&mut out, 0, 2, 2 * e, 2 * e, *b);
        push_entry(&mut out, 0, 2, 2 * e + 1, 2 * e + 1, -b);
    }
    for (idx, dir) in problem.directions.iter().enumerate() {
        for &(i, j, v) in &dir.entries {
            push_entry(&mut out, idx + 1, 1, i as usize, j as usize, v);
        }
        for (e, (row, _)) in problem.equalities.iter().enumerate() {
            push_entry(&mut out, idx + 1, 2, 2 * e, 2 * e, row[idx]);
            push_entry(&mut out, idx + 1, 2, 2 * e + 1, 2 * e + 1, -row[idx]);
        }
    }
    if problem.lambda_slack {
        let t = m;
        for i in 0..n {
            push_entry(&mut out, t, 1, i, i, -1.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn chsh_structure_sizes() {
        let pr = fixtures::pr_box_correlation();
        let compiled = compile_bell(&pr).unwrap();
        assert_eq!(compiled.structure.n_words(), 25);
        assert_eq!(compiled.problem.dim, 25);
        // pinned data entries: 24 word probabilities + normalization
        let data_classes = compiled
            .structure
            .classes
            .iter()
            .filter(|c| c.data)
            .count();
        assert_eq!(data_classes, 25);
    }

    #[test]
    fn single_party_boxes_are_always_feasible() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let layout = PartyLayout::uniform(1, 2, 2);
            let p0: Vec<f64> = (0..2).map(|_| rng.gen::<f64>()).collect();
            let corr = Correlation::from_fn(layout, |a, x| {
                let p = p0[x[0]].min(0.999).max(0.001);
                if a[0] == 0 {
                    p
                } else {
                    1.0 - p
                }
            })
            .unwrap();
            let compiled = compile_bell(&corr).unwrap();
            assert_eq!(compiled.problem.dim, 5);
            let report = membership(&compiled, &opts()).unwrap();
            assert!(report.feasible, "t_star {}", report.t_star);
        }
    }

    #[test]
    fn deterministic_local_box_is_feasible() {
        let layout = PartyLayout::uniform(2, 2, 2);
        let corr = Correlation::from_fn(layout, |a, _x| {
            if a[0] == 0 && a[1] == 0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let report = bell_membership(&corr, &opts()).unwrap();
        assert!(report.feasible);
        assert!(report.certificate.min_eigenvalue() >= -1e-7);
        assert!((report.certificate.scalar(0, 0).re - 1.0).abs() < 1e-9);

        // the explicit rank-1 certificate Γ = g gᵀ, g the indicator of words
        // consistent with the deterministic assignment a(x)=0, b(y)=0
        let compiled = compile_bell(&corr).unwrap();
        let words = &compiled.structure.words;
        let g: Vec<f64> = words
            .iter()
            .map(|w| {
                if w.letters().iter().all(|l| l.output == 0) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let n = words.len();
        let gamma = MomentMatrix {
            layout: compiled.structure.layout.clone(),
            words: words.clone(),
            kind: MomentKind::Scalar,
            entries: CMatrix::from_fn(n, n, |i, j| c64::new(g[i] * g[j], 0.0)),
        };
        assert!(gamma.structure_violation() < 1e-12);
        // pins match the correlation's marginals
        for (i, w) in words.iter().enumerate() {
            let parties: Vec<usize> = w.letters().iter().map(|l| l.party).collect();
            let outs: Vec<usize> = w.letters().iter().map(|l| l.output).collect();
            let ins: Vec<usize> = w.letters().iter().map(|l| l.input).collect();
            let p = if w.is_empty() {
                1.0
            } else {
                corr.marginal_prob(&parties, &outs, &ins)
            };
            assert!((gamma.scalar(0, i).re - p).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_correlation_is_bell_feasible() {
        let asm = fixtures::singlet();
        let bob = fixtures::pauli_zx_measurements();
        let corr = crate::quantum::assemblage_correlation(&asm, &bob).unwrap();
        let report = bell_membership(&corr, &opts()).unwrap();
        assert!(report.feasible, "t_star {}", report.t_star);
    }

    #[test]
    fn pr_box_is_bell_infeasible() {
        let pr = fixtures::pr_box_correlation();
        let report = bell_membership(&pr, &opts()).unwrap();
        assert!(!report.feasible);
        assert!(report.t_star <= -1e-3, "t_star {}", report.t_star);
        assert!(report.witness.is_some());
    }

    #[test]
    fn compiled_structure_shares_variable_slots() {
        let asm = fixtures::singlet();
        let compiled = compile_epr(&asm).unwrap();
        // pairs with equal product keys share a class
        let s = &compiled.structure;
        for i in 0..s.n_words() {
            for j in 0..s.n_words() {
                for i2 in 0..s.n_words() {
                    for j2 in 0..s.n_words() {
                        let k1 = product_key(&s.words[i], &s.words[j]);
                        let k2 = product_key(&s.words[i2], &s.words[j2]);
                        if k1 == k2 && !k1.is_null() {
                            assert_eq!(s.class_of(i, j), s.class_of(i2, j2));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn singlet_epr_membership_feasible() {
        let asm = fixtures::singlet();
        let compiled = compile_epr(&asm).unwrap();
        // 5 words, blocks 2x2, embedded 20x20
        assert_eq!(compiled.problem.dim, 20);
        let report = membership(&compiled, &opts()).unwrap();
        assert!(report.feasible, "t_star {}", report.t_star);
        let cert = &report.certificate;
        assert!(cert.structure_violation() < 1e-6);
        // pinned blocks match the assemblage
        let rho = asm.reduced_state_unchecked();
        assert!(cert.block(0, 0).sub(&rho).max_abs() < 1e-6);
    }

    #[test]
    fn deterministic_assemblage_feasible() {
        let asm = fixtures::deterministic();
        let report = epr_membership(&asm, &opts()).unwrap();
        assert!(report.feasible);
    }

    #[test]
    fn signalling_inputs_are_rejected() {
        let mut asm = fixtures::singlet();
        let bump = CMatrix::diag(&[0.1, -0.1]);
        *asm.element_mut(&[0], &[0]) = asm.element(&[0], &[0]).add(&bump);
        assert!(compile_epr(&asm).is_err());
    }

    #[test]
    fn tsirelson_bound_via_maximize() {
        let scenario = Scenario::new(2, 2, 2, 1).unwrap();
        let v = maximize_functional(&scenario, &chsh_functional(), &opts()).unwrap();
        let tsirelson = 2.0 * std::f64::consts::SQRT_2;
        assert!((v - tsirelson).abs() < 1e-4, "got {v}");
    }

    #[test]
    fn trivial_functional_is_one() {
        // functional = Γ(∅,∅), encoded as Σ_ab p(ab|00) which pins to 1
        let scenario = Scenario::new(2, 2, 2, 1).unwrap();
        let mut f = Functional::new();
        for a in 0..2 {
            for b in 0..2 {
                f.insert((vec![a, b], vec![0, 0]), 1.0);
            }
        }
        let v = maximize_functional(&scenario, &f, &opts()).unwrap();
        assert!((v - 1.0).abs() < 1e-6);
    }

    #[test]
    fn chsh_local_bound_is_two() {
        let b = local_bound_2x2(&chsh_functional());
        assert_eq!(b, 2.0);
    }

    #[test]
    fn feasibility_verdicts_have_margin() {
        // verdicts stay put when feas_tol moves by 10x either way
        let pr = fixtures::pr_box_correlation();
        let r = bell_membership(&pr, &opts()).unwrap();
        for scale in [0.1, 10.0] {
            let feasible = r.t_star >= -opts().feas_tol * scale;
            assert!(!feasible);
        }
        let asm = fixtures::singlet();
        let r = epr_membership(&asm, &opts()).unwrap();
        for scale in [0.1, 10.0] {
            let feasible = r.t_star >= -opts().feas_tol * scale;
            assert!(feasible);
        }
    }

    #[test]
    fn sdpa_export_encodes_equalities_as_paired_inequalities() {
        let p = SdpProblem {
            dim: 2,
            base: RMatrix::identity(2),
            directions: vec![SparseSym::from_upper(&[(0, 1, 1.0)])],
            objective: vec![1.0],
            objective_shift: 0.0,
            lambda_slack: false,
            equalities: vec![(vec![2.0], 0.5)],
        };
        let text = export_sdpa(&p, "equality test");
        assert!(text.contains("2 = nBLOCK"));
        assert!(text.contains("2 -2"));
        // F0 carries ±b on the diagonal block, the variable carries ±a
        assert!(text.contains("0 2 1 1 0.5"));
        assert!(text.contains("0 2 2 2 -0.5"));
        assert!(text.contains("1 2 1 1 2"));
        assert!(text.contains("1 2 2 2 -2"));
    }

    #[test]
    fn sdpa_export_has_expected_shape() {
        let pr = fixtures::pr_box_correlation();
        let compiled = compile_bell(&pr).unwrap();
        let text = export_sdpa(&compiled.problem, "pr-box membership");
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with('"'));
        let m: usize = lines
            .next()
            .unwrap()
            .split_whitespace()
            .next()
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(m, compiled.problem.directions.len() + 1);
        assert_eq!(lines.next().unwrap().trim(), "1 = nBLOCK");
        assert_eq!(lines.next().unwrap().trim(), "25");
        // objective line: zeros then -1 for the slack
        let c_line = lines.next().unwrap();
        assert!(c_line.trim().ends_with("-1"));
    }
}
