//! Exact linear programming over rationals.
//!
//! A two-phase primal simplex on a sparse tableau. Every result carries a
//! certificate that [`certify`] re-checks with exact arithmetic: a dual
//! solution for optima, a Farkas multiplier vector for infeasible programs and
//! a recession ray for unbounded ones.
//!
//! Pivoting uses Dantzig's largest-coefficient rule and drops to Bland's
//! smallest-index rule once the objective has stalled for `STALL_LIMIT`
//! consecutive pivots, which keeps the termination guarantee of Bland's rule. [`PivotRule::Bland`] forces the
//! textbook rule throughout.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

mod q;
use q::Q;

/// Degenerate pivots tolerated under Dantzig's rule before switching to Bland's.
const STALL_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptSense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    Bland,
    #[default]
    DantzigThenBland,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarBound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBound {
    pub fn non_negative() -> Self {
        VarBound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        VarBound {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        VarBound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }
}

/// A sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub rows: Vec<SparseRow>,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<Rational>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    /// `num_vars` non-negative variables, zero objective, no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
            senses: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![VarBound::non_negative(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, cost: Rational, bound: VarBound) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    /// Adds a row; duplicate column entries are summed and zeros dropped.
    pub fn add_row(&mut self, coeffs: SparseRow, sense: RowSense, rhs: Rational) -> usize {
        self.rows.push(normalize_row(coeffs));
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(Error::MalformedLp(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if self.senses.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(Error::MalformedLp(format!(
                "{} rows, {} senses, {} right-hand sides",
                self.rows.len(),
                self.senses.len(),
                self.rhs.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(&(c, _)) = row.iter().find(|(c, _)| *c >= n) {
                return Err(Error::MalformedLp(format!("row {i} references column {c} of {n}")));
            }
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(Error::MalformedLp(format!("variable {j} has lower {l} > upper {u}")));
                }
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, i: usize, x: &[Rational]) -> Rational {
        self.rows[i].iter().map(|(c, a)| a * &x[*c]).sum()
    }
}

fn normalize_row(mut coeffs: SparseRow) -> SparseRow {
    coeffs.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow = Vec::with_capacity(coeffs.len());
    for (c, a) in coeffs {
        match out.last_mut() {
            Some((lc, la)) if *lc == c => *la += a,
            _ => out.push((c, a)),
        }
    }
    out.retain(|(_, a)| !a.is_zero());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve_lp`].
///
/// * `Optimal`: `primal` is an optimal point and `dual` holds one multiplier
///   per row (see [`certify`] for the sign conventions).
/// * `Infeasible`: `dual` is a Farkas vector; `primal` is empty.
/// * `Unbounded`: `primal` is a feasible point and `ray` an improving
///   direction along which it stays feasible.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<Rational>,
    pub dual: Vec<Rational>,
    pub objective_value: Rational,
    pub ray: Vec<Rational>,
    pub pivots: usize,
}

/// How an original variable is expressed through standard-form columns:
/// `x = constant + sum(coeff * y_col)`.
#[derive(Debug, Clone)]
struct VarMap {
    constant: Rational,
    terms: Vec<(usize, Rational)>,
}

type QRow = Vec<(usize, Q)>;

struct Tableau {
    /// Constraint rows; column `width` holds the right-hand side.
    rows: Vec<QRow>,
    width: usize,
    /// Dense reduced-cost row; entry `width` is minus the objective value.
    z: Vec<Q>,
    basis: Vec<usize>,
    /// Columns that may never enter (artificials once phase 1 is over).
    barred: Vec<bool>,
    pivots: usize,
}

fn get(row: &QRow, c: usize) -> Option<&Q> {
    row.binary_search_by_key(&c, |(cc, _)| *cc)
        .ok()
        .map(|i| &row[i].1)
}

/// `a - f * b` for sparse rows.
fn axpy(a: &QRow, f: &Q, b: &QRow) -> QRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ord = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => Ordering::Less,
            (None, _) => Ordering::Greater,
        };
        match ord {
            Ordering::Less => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                out.push((b[j].0, f.mul(&b[j].1).neg()));
                j += 1;
            }
            Ordering::Equal => {
                let v = a[i].1.sub(&f.mul(&b[j].1));
                if !v.is_zero() {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Tableau {
    fn new(rows: Vec<SparseRow>, width: usize, basis: Vec<usize>) -> Self {
        Tableau {
            rows: rows
                .iter()
                .map(|r| r.iter().map(|(c, v)| (*c, Q::from_rational(v))).collect())
                .collect(),
            width,
            z: vec![Q::zero(); width + 1],
            basis,
            barred: vec![false; width],
            pivots: 0,
        }
    }

    fn rhs(&self, r: usize) -> Rational {
        get(&self.rows[r], self.width).map_or_else(Rational::zero, Q::to_rational)
    }

    fn entry(&self, r: usize, c: usize) -> Option<Rational> {
        get(&self.rows[r], c).map(Q::to_rational)
    }

    fn row(&self, r: usize) -> SparseRow {
        self.rows[r].iter().map(|(c, v)| (*c, v.to_rational())).collect()
    }

    fn z_at(&self, j: usize) -> Rational {
        self.z[j].to_rational()
    }

    fn set_z(&mut self, z: &[Rational]) {
        self.z = z.iter().map(Q::from_rational).collect();
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pv = get(&self.rows[r], c).cloned().expect("pivot on zero");
        for (_, v) in self.rows[r].iter_mut() {
            *v = v.div(&pv);
        }
        let prow = std::mem::take(&mut self.rows[r]);
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = get(&self.rows[i], c).cloned() {
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
            }
        }
        let f = self.z[c].clone();
        if !f.is_zero() {
            for (j, v) in &prow {
                self.z[*j] = self.z[*j].sub(&f.mul(v));
            }
        }
        self.rows[r] = prow;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs primal simplex (maximization of the current z-row).
    /// Returns `Some(entering column)` if unbounded along that column.
    fn optimize(&mut self, rule: PivotRule) -> Option<usize> {
        let mut stall = 0usize;
        loop {
            let use_bland = rule == PivotRule::Bland || stall >= STALL_LIMIT;
            let entering = if use_bland {
                (0..self.width).find(|&j| !self.barred[j] && self.z[j].is_positive())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.width {
                    if !self.barred[j]
                        && self.z[j].is_positive()
                        && best.is_none_or(|b| self.z[j].cmp(&self.z[b]) == Ordering::Greater)
                    {
                        best = Some(j);
                    }
                }
                best
            };
            let e = entering?;
            // Ratio test, ties broken by the smallest basic column index.
            let mut leave: Option<(usize, Q)> = None;
            for r in 0..self.rows.len() {
                let Some(a) = get(&self.rows[r], e) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = get(&self.rows[r], self.width).map_or_else(Q::zero, |b| b.div(a));
                let better = match &leave {
                    None => true,
                    Some((lr, lv)) => match ratio.cmp(lv) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*lr],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, theta)) = leave else {
                return Some(e);
            };
            if theta.is_zero() {
                stall += 1;
            } else {
                stall = 0;
            }
            self.pivot(r, e);
        }
    }
}

/// Solves `lp`. Dimensions are validated first.
pub fn solve_lp(lp: &LinearProgram, sense: OptSense) -> Result<LpSolution> {
    solve_lp_with(lp, sense, PivotRule::default())
}

pub fn solve_lp_with(lp: &LinearProgram, sense: OptSense, rule: PivotRule) -> Result<LpSolution> {
    lp.validate()?;
    let n = lp.num_vars();

    // Standard-form columns for the structural variables.
    let mut maps: Vec<VarMap> = Vec::with_capacity(n);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &lp.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), u) => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = u {
                    bound_rows.push((col, u - l));
                }
                VarMap {
                    constant: l.clone(),
                    terms: vec![(col, Rational::one())],
                }
            }
            (None, Some(u)) => {
                let col = ncols;
                ncols += 1;
                VarMap {
                    constant: u.clone(),
                    terms: vec![(col, -Rational::one())],
                }
            }
            (None, None) => {
                let col = ncols;
                ncols += 2;
                VarMap {
                    constant: Rational::zero(),
                    terms: vec![(col, Rational::one()), (col + 1, -Rational::one())],
                }
            }
        };
        maps.push(map);
    }
    let nstruct = ncols;

    // Rows in standard-column space: original rows then bound rows.
    let mut srows: Vec<(SparseRow, RowSense, Rational)> = Vec::new();
    for i in 0..lp.num_rows() {
        let mut coeffs = Vec::new();
        let mut shift = Rational::zero();
        for (j, a) in &lp.rows[i] {
            shift += a * &maps[*j].constant;
            for (c, m) in &maps[*j].terms {
                coeffs.push((*c, a * m));
            }
        }
        srows.push((normalize_row(coeffs), lp.senses[i], &lp.rhs[i] - shift));
    }
    for (col, cap) in &bound_rows {
        srows.push((vec![(*col, Rational::one())], RowSense::Le, cap.clone()));
    }
    let m = srows.len();

    // Slack columns, then artificial columns.
    let mut slack_of = vec![None; m];
    for (i, (_, s, _)) in srows.iter().enumerate() {
        if *s != RowSense::Eq {
            slack_of[i] = Some(ncols);
            ncols += 1;
        }
    }
    let mut sign = vec![Rational::one(); m];
    let mut rows: Vec<SparseRow> = Vec::with_capacity(m);
    let mut id_col = vec![0usize; m];
    let mut art_cols: Vec<usize> = Vec::new();
    let mut art_rows: Vec<usize> = Vec::new();
    let mut pending_art: Vec<usize> = Vec::new();
    for (i, (coeffs, s, b)) in srows.iter().enumerate() {
        let mut row = coeffs.clone();
        if let Some(sc) = slack_of[i] {
            let v = if *s == RowSense::Le { Rational::one() } else { -Rational::one() };
            row.push((sc, v));
        }
        let mut b = b.clone();
        if b.is_negative() {
            sign[i] = -Rational::one();
            for (_, v) in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        let slack_is_unit = slack_of[i]
            .and_then(|sc| row.iter().find(|(c, _)| *c == sc).map(|(_, v)| v.is_one()))
            .unwrap_or(false);
        if slack_is_unit {
            id_col[i] = slack_of[i].unwrap();
        } else {
            pending_art.push(i);
        }
        if !b.is_zero() {
            row.push((usize::MAX, b)); // placeholder for the rhs column
        }
        rows.push(row);
    }
    for &i in &pending_art {
        id_col[i] = ncols;
        art_cols.push(ncols);
        art_rows.push(i);
        rows[i].push((ncols, Rational::one()));
        ncols += 1;
    }
    let width = ncols;
    for row in rows.iter_mut() {
        for entry in row.iter_mut() {
            if entry.0 == usize::MAX {
                entry.0 = width;
            }
        }
        row.sort_by_key(|(c, _)| *c);
    }

    let mut is_art = vec![false; width];
    for &c in &art_cols {
        is_art[c] = true;
    }

    let mut t = Tableau::new(rows, width, id_col.clone());

    // Phase 1: maximize -sum(artificials).
    let mut phase1_cost = vec![Rational::zero(); width];
    for &c in &art_cols {
        phase1_cost[c] = -Rational::one();
    }
    if !art_cols.is_empty() {
        let mut z = vec![Rational::zero(); width + 1];
        for &i in &art_rows {
            for (j, v) in t.row(i) {
                z[j] += v;
            }
        }
        for &c in &art_cols {
            z[c] = Rational::zero();
        }
        t.set_z(&z);
        t.optimize(rule);
        let phase1_value = -t.z_at(width);
        if phase1_value.is_negative() {
            // Farkas multipliers from the phase-1 duals.
            let w: Vec<Rational> = (0..m).map(|i| &phase1_cost[id_col[i]] - t.z_at(id_col[i])).collect();
            let dual: Vec<Rational> = (0..lp.num_rows()).map(|i| &w[i] * &sign[i]).collect();
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                dual,
                objective_value: Rational::zero(),
                ray: Vec::new(),
                pivots: t.pivots,
            });
        }
        // Drive remaining artificials out of the basis where possible.
        for r in 0..m {
            if !is_art[t.basis[r]] {
                continue;
            }
            let cand = t
                .row(r)
                .iter()
                .find(|(c, _)| *c < width && !is_art[*c])
                .map(|(c, _)| *c);
            if let Some(c) = cand {
                t.pivot(r, c);
            }
        }
        for &c in &art_cols {
            t.barred[c] = true;
        }
    }

    // Phase 2 objective in standard columns (always maximize internally).
    let flip = if sense == OptSense::Minimize { -Rational::one() } else { Rational::one() };
    let mut cost = vec![Rational::zero(); width];
    let mut offset = Rational::zero();
    for (j, c) in lp.objective.iter().enumerate() {
        let c = c * &flip;
        offset += &c * &maps[j].constant;
        for (col, mcoef) in &maps[j].terms {
            cost[*col] += &c * mcoef;
        }
    }
    let mut z = vec![Rational::zero(); width + 1];
    z[..width].clone_from_slice(&cost);
    for r in 0..m {
        let cb = &cost[t.basis[r]];
        if cb.is_zero() {
            continue;
        }
        for (j, v) in t.row(r) {
            z[j] -= cb * v;
        }
    }
    t.set_z(&z);
    let unbounded_col = t.optimize(rule);

    let mut ystd = vec![Rational::zero(); width];
    for r in 0..m {
        ystd[t.basis[r]] = t.rhs(r);
    }
    let to_original = |v: &[Rational], with_constant: bool| -> Vec<Rational> {
        maps.iter()
            .map(|mp| {
                let mut x = if with_constant { mp.constant.clone() } else { Rational::zero() };
                for (c, coef) in &mp.terms {
                    x += coef * &v[*c];
                }
                x
            })
            .collect()
    };
    let primal = to_original(&ystd, true);
    let internal_value = -t.z_at(width) + &offset;
    let objective_value = &internal_value * &flip;

    if let Some(e) = unbounded_col {
        let mut dir = vec![Rational::zero(); width];
        dir[e] = Rational::one();
        for r in 0..m {
            if let Some(a) = t.entry(r, e) {
                dir[t.basis[r]] = -a;
            }
        }
        let _ = nstruct;
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal,
            dual: Vec::new(),
            objective_value,
            ray: to_original(&dir, false),
            pivots: t.pivots,
        });
    }

    // Row duals of the internal maximization: y_i = cost(id) - z(id).
    let dual: Vec<Rational> = (0..lp.num_rows())
        .map(|i| {
            let c = id_col[i];
            let base = if is_art[c] { Rational::zero() } else { cost[c].clone() };
            (base - t.z_at(c)) * &sign[i] * &flip
        })
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual,
        objective_value,
        ray: Vec::new(),
        pivots: t.pivots,
    })
}

fn dot_row(row: &SparseRow, x: &[Rational]) -> Rational {
    row.iter().map(|(c, a)| a * &x[*c]).sum()
}

/// `A^T y` over the structural columns.
fn transpose_dot(lp: &LinearProgram, y: &[Rational]) -> Vec<Rational> {
    let mut g = vec![Rational::zero(); lp.num_vars()];
    for (i, row) in lp.rows.iter().enumerate() {
        if y[i].is_zero() {
            continue;
        }
        for (c, a) in row {
            g[*c] += a * &y[i];
        }
    }
    g
}

fn check_primal(lp: &LinearProgram, x: &[Rational]) -> std::result::Result<(), String> {
    if x.len() != lp.num_vars() {
        return Err(format!("primal has {} entries for {} variables", x.len(), lp.num_vars()));
    }
    for (j, b) in lp.bounds.iter().enumerate() {
        if b.lower.as_ref().is_some_and(|l| &x[j] < l) || b.upper.as_ref().is_some_and(|u| &x[j] > u) {
            return Err(format!("x[{j}] = {} violates its bounds", x[j]));
        }
    }
    for i in 0..lp.num_rows() {
        let act = dot_row(&lp.rows[i], x);
        let ok = match lp.senses[i] {
            RowSense::Le => act <= lp.rhs[i],
            RowSense::Ge => act >= lp.rhs[i],
            RowSense::Eq => act == lp.rhs[i],
        };
        if !ok {
            return Err(format!("row {i} violated: activity {act} vs rhs {}", lp.rhs[i]));
        }
    }
    Ok(())
}

/// Sign a row multiplier must have so that `sum y_i (a_i x - b_i) <= 0`
/// holds for every feasible `x`: non-negative on `<=`, non-positive on `>=`.
fn farkas_sign_ok(sense: RowSense, y: &Rational) -> bool {
    match sense {
        RowSense::Le => !y.is_negative(),
        RowSense::Ge => !y.is_positive(),
        RowSense::Eq => true,
    }
}

/// Minimum of `g^T x` over the variable bounds; `None` if unbounded below.
fn min_over_bounds(lp: &LinearProgram, g: &[Rational]) -> Option<Rational> {
    let mut total = Rational::zero();
    for (j, gj) in g.iter().enumerate() {
        if gj.is_zero() {
            continue;
        }
        let b = &lp.bounds[j];
        let at = if gj.is_positive() { b.lower.as_ref() } else { b.upper.as_ref() }?;
        total += gj * at;
    }
    Some(total)
}

/// Re-checks the certificate attached to `sol` with exact arithmetic.
///
/// Optimal (maximize): primal feasible; `y_i >= 0` on `<=` rows and `<= 0` on
/// `>=` rows; reduced costs `d = c - A^T y` are positive only at finite upper
/// bounds and negative only at finite lower bounds; complementary slackness
/// holds and `c^T x = y^T b + d^T x`. Minimization flips every sign.
///
/// Infeasible: `y` has the Farkas signs above and
/// `min over bounds of (A^T y)^T x > y^T b`.
pub fn certify(lp: &LinearProgram, sense: OptSense, sol: &LpSolution) -> std::result::Result<(), String> {
    match sol.status {
        LpStatus::Optimal => {
            check_primal(lp, &sol.primal)?;
            let x = &sol.primal;
            let y = &sol.dual;
            if y.len() != lp.num_rows() {
                return Err("dual has wrong length".into());
            }
            let s = if sense == OptSense::Maximize { Rational::one() } else { -Rational::one() };
            for (i, yi) in y.iter().enumerate() {
                if !farkas_sign_ok(lp.senses[i], &(yi * &s)) {
                    return Err(format!("dual y[{i}] = {yi} has the wrong sign"));
                }
                if !yi.is_zero() && dot_row(&lp.rows[i], x) != lp.rhs[i] {
                    return Err(format!("row {i} has a non-zero dual but is slack"));
                }
            }
            let g = transpose_dot(lp, y);
            let mut dx = Rational::zero();
            for j in 0..lp.num_vars() {
                let d = (&lp.objective[j] - &g[j]) * &s;
                let b = &lp.bounds[j];
                if d.is_positive() && b.upper.as_ref() != Some(&x[j]) {
                    return Err(format!("reduced cost of x[{j}] is improving but x is not at its upper bound"));
                }
                if d.is_negative() && b.lower.as_ref() != Some(&x[j]) {
                    return Err(format!("reduced cost of x[{j}] is improving but x is not at its lower bound"));
                }
                dx += (&lp.objective[j] - &g[j]) * &x[j];
            }
            let cx: Rational = lp.objective.iter().zip(x).map(|(c, v)| c * v).sum();
            let yb: Rational = y.iter().zip(&lp.rhs).map(|(a, b)| a * b).sum();
            if cx != sol.objective_value {
                return Err(format!("objective {} does not match c^T x = {cx}", sol.objective_value));
            }
            if yb + dx != cx {
                return Err("duality gap is non-zero".into());
            }
            Ok(())
        }
        LpStatus::Infeasible => {
            let y = &sol.dual;
            if y.len() != lp.num_rows() {
                return Err("Farkas vector has wrong length".into());
            }
            for (i, yi) in y.iter().enumerate() {
                if !farkas_sign_ok(lp.senses[i], yi) {
                    return Err(format!("Farkas multiplier y[{i}] has the wrong sign"));
                }
            }
            let g = transpose_dot(lp, y);
            let yb: Rational = y.iter().zip(&lp.rhs).map(|(a, b)| a * b).sum();
            match min_over_bounds(lp, &g) {
                Some(lo) if lo > yb => Ok(()),
                Some(lo) => Err(format!("Farkas bound {lo} does not exceed y^T b = {yb}")),
                None => Err("Farkas combination is unbounded over the variable box".into()),
            }
        }
        LpStatus::Unbounded => {
            check_primal(lp, &sol.primal)?;
            let r = &sol.ray;
            if r.len() != lp.num_vars() {
                return Err("ray has wrong length".into());
            }
            for i in 0..lp.num_rows() {
                let a = dot_row(&lp.rows[i], r);
                let ok = match lp.senses[i] {
                    RowSense::Le => !a.is_positive(),
                    RowSense::Ge => !a.is_negative(),
                    RowSense::Eq => a.is_zero(),
                };
                if !ok {
                    return Err(format!("ray leaves row {i}"));
                }
            }
            for (j, b) in lp.bounds.iter().enumerate() {
                if (b.lower.is_some() && r[j].is_negative()) || (b.upper.is_some() && r[j].is_positive()) {
                    return Err(format!("ray leaves the bounds of x[{j}]"));
                }
            }
            let cr: Rational = lp.objective.iter().zip(r).map(|(c, v)| c * v).sum();
            let improving = match sense {
                OptSense::Maximize => cr.is_positive(),
                OptSense::Minimize => cr.is_negative(),
            };
            if improving {
                Ok(())
            } else {
                Err("ray does not improve the objective".into())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Lt,
    Eq,
    Ge,
    Gt,
}

impl ConstraintSense {
    fn is_strict(self) -> bool {
        matches!(self, ConstraintSense::Lt | ConstraintSense::Gt)
    }

    fn relaxed(self) -> RowSense {
        match self {
            ConstraintSense::Le | ConstraintSense::Lt => RowSense::Le,
            ConstraintSense::Eq => RowSense::Eq,
            ConstraintSense::Ge | ConstraintSense::Gt => RowSense::Ge,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: SparseRow,
    pub sense: ConstraintSense,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(coeffs: SparseRow, sense: ConstraintSense, rhs: Rational) -> Self {
        LinearConstraint { coeffs, sense, rhs }
    }
}

/// A system of (possibly strict) linear constraints over bounded variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityProblem {
    pub bounds: Vec<VarBound>,
    pub constraints: Vec<LinearConstraint>,
}

impl FeasibilityProblem {
    pub fn new(num_vars: usize) -> Self {
        FeasibilityProblem {
            bounds: vec![VarBound::non_negative(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn push(&mut self, coeffs: SparseRow, sense: ConstraintSense, rhs: Rational) {
        self.constraints.push(LinearConstraint::new(coeffs, sense, rhs));
    }

    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.bounds.len() {
            return false;
        }
        let in_bounds = self.bounds.iter().zip(x).all(|(b, v)| {
            b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u)
        });
        in_bounds
            && self.constraints.iter().all(|c| {
                let act: Rational = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
                match c.sense {
                    ConstraintSense::Le => act <= c.rhs,
                    ConstraintSense::Lt => act < c.rhs,
                    ConstraintSense::Eq => act == c.rhs,
                    ConstraintSense::Ge => act >= c.rhs,
                    ConstraintSense::Gt => act > c.rhs,
                }
            })
    }

    /// Checks a certificate returned by [`check_feasible`]: multipliers with
    /// Farkas signs such that `min over bounds of (A^T y)^T x` exceeds `y^T b`,
    /// or equals it while some strict constraint carries a non-zero multiplier.
    pub fn certificate_is_valid(&self, y: &[Rational]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let mut g = vec![Rational::zero(); self.bounds.len()];
        let mut yb = Rational::zero();
        let mut strict_used = false;
        for (c, yi) in self.constraints.iter().zip(y) {
            if !farkas_sign_ok(c.sense.relaxed(), yi) {
                return false;
            }
            if yi.is_zero() {
                continue;
            }
            strict_used |= c.sense.is_strict();
            yb += yi * &c.rhs;
            for (j, a) in &c.coeffs {
                g[*j] += a * yi;
            }
        }
        let mut lo = Rational::zero();
        for (j, gj) in g.iter().enumerate() {
            if gj.is_zero() {
                continue;
            }
            let b = &self.bounds[j];
            let Some(at) = (if gj.is_positive() { b.lower.as_ref() } else { b.upper.as_ref() }) else {
                return false;
            };
            lo += gj * at;
        }
        lo > yb || (lo == yb && strict_used)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(Vec<Rational>),
}

/// Decides a system with strict inequalities exactly. Strict rows get a
/// shared margin `t in [0, 1]` that is maximized; the system is feasible iff
/// the best margin is positive.
pub fn check_feasible(problem: &FeasibilityProblem) -> Result<Feasibility> {
    let nv = problem.bounds.len();
    let has_strict = problem.constraints.iter().any(|c| c.sense.is_strict());
    let mut lp = LinearProgram::new(nv);
    lp.bounds = problem.bounds.clone();
    let margin = has_strict.then(|| lp.add_var(Rational::one(), VarBound::between(Rational::zero(), Rational::one())));
    for c in &problem.constraints {
        let mut coeffs = c.coeffs.clone();
        if let Some(t) = margin {
            match c.sense {
                ConstraintSense::Lt => coeffs.push((t, Rational::one())),
                ConstraintSense::Gt => coeffs.push((t, -Rational::one())),
                _ => {}
            }
        }
        lp.add_row(coeffs, c.sense.relaxed(), c.rhs.clone());
    }
    let sol = solve_lp(&lp, OptSense::Maximize)?;
    match sol.status {
        LpStatus::Infeasible => Ok(Feasibility::Infeasible(sol.dual)),
        LpStatus::Unbounded => Err(Error::Internal("margin program cannot be unbounded".into())),
        LpStatus::Optimal => {
            if margin.is_none() || sol.objective_value.is_positive() {
                Ok(Feasibility::Feasible(sol.primal[..nv].to_vec()))
            } else {
                Ok(Feasibility::Infeasible(sol.dual))
            }
        }
    }
}
