//! Dense phase-one simplex over exact rationals with Bland's rule, plus
//! depth-first branch and bound for integrality.
//!
//! All structural variables are non-negative. Arithmetic is checked; any
//! overflow makes the answer [`LpResult::Overflow`], which callers treat
//! as "don't know".

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

type Q = Ratio<i128>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RowKind {
    /// `sum <= rhs`
    Le,
    /// `sum = rhs`
    Eq,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, i64)>,
    pub kind: RowKind,
    pub rhs: i64,
}

#[derive(Clone, PartialEq, Debug)]
pub enum LpResult {
    Feasible(Vec<Q>),
    Infeasible,
    Overflow,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum IlpResult {
    Feasible(Vec<i64>),
    Infeasible,
    Unknown,
}

fn add(a: &Q, b: &Q) -> Option<Q> {
    a.checked_add(b)
}

fn sub(a: &Q, b: &Q) -> Option<Q> {
    a.checked_sub(b)
}

fn mul(a: &Q, b: &Q) -> Option<Q> {
    a.checked_mul(b)
}

fn div(a: &Q, b: &Q) -> Option<Q> {
    a.checked_div(b)
}

/// Finds a non-negative rational point satisfying every row, or proves
/// there is none.
pub fn solve_lp(num_vars: usize, rows: &[Row]) -> LpResult {
    match solve_lp_inner(num_vars, rows) {
        Some(r) => r,
        None => LpResult::Overflow,
    }
}

fn solve_lp_inner(num_vars: usize, rows: &[Row]) -> Option<LpResult> {
    let m = rows.len();
    if m == 0 {
        return Some(LpResult::Feasible(vec![Q::zero(); num_vars]));
    }
    let num_slack = rows.iter().filter(|r| r.kind == RowKind::Le).count();
    // columns: structural | slack | artificial | rhs
    let n = num_vars + num_slack + m;
    let width = n + 1;
    let mut t = vec![Q::zero(); m * width];
    let mut basis = vec![0usize; m];
    let mut slack = num_vars;
    for (i, r) in rows.iter().enumerate() {
        let sign: i128 = if r.rhs < 0 { -1 } else { 1 };
        let row = &mut t[i * width..(i + 1) * width];
        for &(j, c) in &r.coeffs {
            row[j] = add(&row[j], &Q::from_integer(sign * c as i128))?;
        }
        if r.kind == RowKind::Le {
            row[slack] = Q::from_integer(sign);
            slack += 1;
        }
        row[num_vars + num_slack + i] = Q::one();
        row[n] = Q::from_integer(sign * r.rhs as i128);
        basis[i] = num_vars + num_slack + i;
    }
    // Phase 1 objective: minimize the sum of artificials. Reduced costs are
    // minus the column sums over the structural and slack columns.
    let art_start = num_vars + num_slack;
    let mut cost = vec![Q::zero(); width];
    for i in 0..m {
        for j in 0..width {
            if j >= art_start && j < n {
                continue;
            }
            cost[j] = sub(&cost[j], &t[i * width + j])?;
        }
    }
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > 50_000 {
            return None;
        }
        // Bland: smallest index with negative reduced cost.
        let enter = (0..n).find(|&j| cost[j].is_negative());
        let Some(e) = enter else { break };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            let a = &t[i * width + e];
            if a.is_positive() {
                let ratio = div(&t[i * width + n], a)?;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((l, _)) = leave else {
            // Unbounded direction of a bounded-below objective cannot occur.
            return None;
        };
        pivot(&mut t, &mut cost, width, m, l, e)?;
        basis[l] = e;
    }
    if !cost[n].is_zero() {
        // cost[n] holds minus the objective value.
        return Some(LpResult::Infeasible);
    }
    let mut x = vec![Q::zero(); num_vars];
    for i in 0..m {
        if basis[i] < num_vars {
            x[basis[i]] = t[i * width + n];
        }
    }
    Some(LpResult::Feasible(x))
}

fn pivot(t: &mut [Q], cost: &mut [Q], width: usize, m: usize, l: usize, e: usize) -> Option<()> {
    let p = t[l * width + e];
    if !p.is_one() {
        for j in 0..width {
            let v = &t[l * width + j];
            if !v.is_zero() {
                t[l * width + j] = div(v, &p)?;
            }
        }
    }
    let prow: Vec<(usize, Q)> = (0..width)
        .filter(|&j| !t[l * width + j].is_zero())
        .map(|j| (j, t[l * width + j]))
        .collect();
    for i in 0..m {
        if i == l {
            continue;
        }
        let f = t[i * width + e];
        if f.is_zero() {
            continue;
        }
        for (j, v) in &prow {
            let cell = &t[i * width + j];
            t[i * width + j] = sub(cell, &mul(&f, v)?)?;
        }
    }
    let f = cost[e];
    if !f.is_zero() {
        for (j, v) in &prow {
            cost[*j] = sub(&cost[*j], &mul(&f, v)?)?;
        }
    }
    Some(())
}

/// Integer feasibility by depth-first branch and bound on the first
/// fractional variable. `budget` bounds the number of LP solves.
pub fn solve_ilp(num_vars: usize, rows: &[Row], budget: usize) -> IlpResult {
    let mut rows = rows.to_vec();
    let mut left = budget;
    bb(num_vars, &mut rows, &mut left)
}

fn bb(num_vars: usize, rows: &mut Vec<Row>, left: &mut usize) -> IlpResult {
    if *left == 0 {
        return IlpResult::Unknown;
    }
    *left -= 1;
    let x = match solve_lp(num_vars, rows) {
        LpResult::Infeasible => return IlpResult::Infeasible,
        LpResult::Overflow => return IlpResult::Unknown,
        LpResult::Feasible(x) => x,
    };
    let frac = x.iter().position(|v| !v.is_integer());
    let Some(j) = frac else {
        let mut out = Vec::with_capacity(num_vars);
        for v in &x {
            match i64::try_from(v.to_integer()) {
                Ok(k) => out.push(k),
                Err(_) => return IlpResult::Unknown,
            }
        }
        return IlpResult::Feasible(out);
    };
    let fl = x[j].floor().to_integer();
    let (Ok(lo), Ok(hi)) = (i64::try_from(fl), i64::try_from(fl + 1)) else {
        return IlpResult::Unknown;
    };
    let mut unknown = false;
    // x_j <= floor
    rows.push(Row { coeffs: vec![(j, 1)], kind: RowKind::Le, rhs: lo });
    match bb(num_vars, rows, left) {
        IlpResult::Feasible(s) => {
            rows.pop();
            return IlpResult::Feasible(s);
        }
        IlpResult::Unknown => unknown = true,
        IlpResult::Infeasible => {}
    }
    rows.pop();
    // x_j >= floor + 1
    rows.push(Row { coeffs: vec![(j, -1)], kind: RowKind::Le, rhs: -hi });
    let r = bb(num_vars, rows, left);
    rows.pop();
    match r {
        IlpResult::Infeasible if unknown => IlpResult::Unknown,
        other => other,
    }
}

/// Integer gcd test on a single equality row; cheap pre-filter.
pub fn row_gcd_infeasible(r: &Row) -> bool {
    if r.kind != RowKind::Eq {
        return false;
    }
    let g = r.coeffs.iter().fold(0i64, |g, (_, c)| g.gcd(c));
    g != 0 && r.rhs % g != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(coeffs: &[(usize, i64)], rhs: i64) -> Row {
        Row { coeffs: coeffs.to_vec(), kind: RowKind::Le, rhs }
    }

    fn eq(coeffs: &[(usize, i64)], rhs: i64) -> Row {
        Row { coeffs: coeffs.to_vec(), kind: RowKind::Eq, rhs }
    }

    #[test]
    fn empty_system_is_feasible() {
        assert!(matches!(solve_lp(2, &[]), LpResult::Feasible(_)));
    }

    #[test]
    fn detects_infeasible_bounds() {
        // x >= 3, x <= 2
        let rows = [le(&[(0, -1)], -3), le(&[(0, 1)], 2)];
        assert_eq!(solve_lp(1, &rows), LpResult::Infeasible);
    }

    #[test]
    fn rational_but_not_integer() {
        // 2x = 1
        let rows = [eq(&[(0, 2)], 1)];
        assert!(matches!(solve_lp(1, &rows), LpResult::Feasible(_)));
        assert_eq!(solve_ilp(1, &rows, 100), IlpResult::Infeasible);
    }

    #[test]
    fn branch_and_bound_finds_point() {
        // 2x + 3y = 7
        let rows = [eq(&[(0, 2), (1, 3)], 7)];
        match solve_ilp(2, &rows, 100) {
            IlpResult::Feasible(v) => assert_eq!(2 * v[0] + 3 * v[1], 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn solution_satisfies_rows() {
        // x + y <= 4, x - y = 1, y >= 1
        let rows = [le(&[(0, 1), (1, 1)], 4), eq(&[(0, 1), (1, -1)], 1), le(&[(1, -1)], -1)];
        match solve_lp(2, &rows) {
            LpResult::Feasible(v) => {
                assert!(v[0] + v[1] <= Q::from_integer(4));
                assert_eq!(v[0] - v[1], Q::one());
                assert!(v[1] >= Q::one());
            }
            other => panic!("{other:?}"),
        }
    }
}
