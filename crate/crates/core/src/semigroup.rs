//! Commutative semigroup index sets, the induced directed order, and
//! tail-limit estimation over the directed set.
//!
//! Three index families are supported: the discrete grid ℕ×ℕ (1-based)
//! under componentwise addition, the half-line [0, ∞) under addition, and
//! elements of an explicit finite operation table. The directed order is
//! `s ≤ t` iff `s = t` or `s + u = t` for some `u`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Element of a commutative semigroup index set.
#[derive(Debug, Clone, PartialEq)]
pub enum Index {
    /// Point of the discrete grid ℕ×ℕ; both components are ≥ 1.
    Grid2d { i: u64, j: u64 },
    /// Nonnegative time parameter.
    Time(f64),
    /// Element of a finite semigroup, with a handle to its table so the
    /// operation is self-contained.
    FiniteElem {
        table: Arc<FiniteSemigroup>,
        id: usize,
    },
}

impl Index {
    pub fn grid2d(i: u64, j: u64) -> Result<Self> {
        if i == 0 || j == 0 {
            return Err(Error::invalid(format!(
                "grid index components must be >= 1, got ({i}, {j})"
            )));
        }
        Ok(Index::Grid2d { i, j })
    }

    pub fn time(t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::invalid(format!(
                "time index must be finite and >= 0, got {t}"
            )));
        }
        Ok(Index::Time(t))
    }

    pub fn finite_elem(table: &Arc<FiniteSemigroup>, id: usize) -> Result<Self> {
        if id >= table.len() {
            return Err(Error::invalid(format!(
                "element id {id} out of range for a table of {} elements",
                table.len()
            )));
        }
        Ok(Index::FiniteElem {
            table: Arc::clone(table),
            id,
        })
    }

    /// The semigroup operation `self + other`.
    ///
    /// Both indices must be of the same variant (and, for table elements,
    /// refer to equal tables).
    pub fn combine(&self, other: &Index) -> Result<Index> {
        match (self, other) {
            (Index::Grid2d { i: a, j: b }, Index::Grid2d { i: c, j: d }) => {
                let (i, j) = match (a.checked_add(*c), b.checked_add(*d)) {
                    (Some(i), Some(j)) => (i, j),
                    _ => return Err(Error::invalid("grid index addition overflow")),
                };
                Ok(Index::Grid2d { i, j })
            }
            (Index::Time(s), Index::Time(t)) => Ok(Index::Time(s + t)),
            (
                Index::FiniteElem { table: ta, id: a },
                Index::FiniteElem { table: tb, id: b },
            ) => {
                if !Arc::ptr_eq(ta, tb) && ta != tb {
                    return Err(Error::invalid(
                        "finite elements belong to different semigroup tables",
                    ));
                }
                Ok(Index::FiniteElem {
                    table: Arc::clone(ta),
                    id: ta.combine(*a, *b),
                })
            }
            _ => Err(Error::invalid(
                "cannot combine indices of different variants",
            )),
        }
    }

    /// Directed order: true iff `self = other` or `self + u = other` for
    /// some `u` in the same semigroup.
    pub fn leq(&self, other: &Index) -> Result<bool> {
        match (self, other) {
            (Index::Grid2d { i: a, j: b }, Index::Grid2d { i: c, j: d }) => {
                // u = (c - a, d - b) exists with both components >= 1.
                Ok((a == c && b == d) || (a < c && b < d))
            }
            (Index::Time(s), Index::Time(t)) => Ok(s <= t),
            (
                Index::FiniteElem { table: ta, id: a },
                Index::FiniteElem { table: tb, id: b },
            ) => {
                if !Arc::ptr_eq(ta, tb) && ta != tb {
                    return Err(Error::invalid(
                        "finite elements belong to different semigroup tables",
                    ));
                }
                Ok(ta.leq(*a, *b))
            }
            _ => Err(Error::invalid(
                "cannot order indices of different variants",
            )),
        }
    }
}

/// A finite commutative semigroup given by its full operation table.
///
/// Elements are identified with `0..size`. The constructor checks closure,
/// commutativity and associativity exhaustively, so a constructed value is
/// always a genuine commutative semigroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSemigroup {
    size: usize,
    // Row-major: table[s * size + t] = s + t.
    table: Vec<usize>,
}

impl FiniteSemigroup {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::invalid("semigroup table must be nonempty"));
        }
        let mut table = Vec::with_capacity(size * size);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::invalid(format!(
                    "table row {s} has {} entries, expected {size}",
                    row.len()
                )));
            }
            for (t, &e) in row.iter().enumerate() {
                if e >= size {
                    return Err(Error::invalid(format!(
                        "table entry ({s}, {t}) = {e} is not an element id < {size}"
                    )));
                }
                table.push(e);
            }
        }
        let sg = FiniteSemigroup { size, table };
        for s in 0..size {
            for t in 0..size {
                if sg.combine(s, t) != sg.combine(t, s) {
                    return Err(Error::invalid(format!(
                        "operation is not commutative at ({s}, {t})"
                    )));
                }
                for u in 0..size {
                    if sg.combine(sg.combine(s, t), u) != sg.combine(s, sg.combine(t, u)) {
                        return Err(Error::invalid(format!(
                            "operation is not associative at ({s}, {t}, {u})"
                        )));
                    }
                }
            }
        }
        Ok(sg)
    }

    /// The semigroup {1, .., m} with `s + t = min(s + t, m)`, using ids
    /// `0..m` for the values `1..=m`.
    pub fn saturating(m: usize) -> Self {
        assert!(m >= 1, "saturating semigroup needs at least one element");
        let mut table = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                table.push((a + b + 1).min(m - 1));
            }
        }
        FiniteSemigroup { size: m, table }
    }

    /// The cyclic group Z_k under addition mod k.
    pub fn cyclic(k: usize) -> Self {
        assert!(k >= 1, "cyclic group needs at least one element");
        let mut table = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                table.push((a + b) % k);
            }
        }
        FiniteSemigroup { size: k, table }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn combine(&self, s: usize, t: usize) -> usize {
        debug_assert!(s < self.size && t < self.size);
        self.table[s * self.size + t]
    }

    /// Directed order by exhaustive search: `s = t` or some `u` with
    /// `s + u = t`.
    pub fn leq(&self, s: usize, t: usize) -> bool {
        s == t || (0..self.size).any(|u| self.combine(s, u) == t)
    }

    /// A common upper bound of `s` and `t` in the directed order, if one
    /// exists among the elements.
    pub fn upper_bound(&self, s: usize, t: usize) -> Option<usize> {
        (0..self.size).find(|&w| self.leq(s, w) && self.leq(t, w))
    }

    /// Exact directed-set limsup over a finite semigroup:
    /// `inf_s sup_{t >= s} f(t)`.
    pub fn tail_limsup(&self, f: impl Fn(usize) -> f64) -> f64 {
        (0..self.size)
            .map(|s| {
                (0..self.size)
                    .filter(|&t| self.leq(s, t))
                    .map(&f)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Sup of `f` over the inclusive tail square `[h, 2h]²` of the grid ℕ×ℕ.
///
/// Shift-invariance of the directed limsup means a cofinal tail suffices;
/// this deterministic square is an over-tail approximation of
/// `limsup_{(i,j)} f(i, j)` for functions that stabilize along the grid.
pub fn tail_limsup_grid2d(f: impl Fn(u64, u64) -> f64, horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("horizon must be >= 1"));
    }
    let top = horizon
        .checked_mul(2)
        .ok_or_else(|| Error::invalid("horizon too large"))?;
    let mut sup = f64::NEG_INFINITY;
    for i in horizon..=top {
        for j in horizon..=top {
            sup = sup.max(f(i, j));
        }
    }
    Ok(sup)
}

/// Sup of `f` over a uniform sample of the tail interval `[h, 2h)`:
/// `ceil(10·h)` points spaced `h / ceil(10·h)` apart, starting at `h`.
///
/// For an integral horizon the spacing is exactly 0.1, so peaks of the
/// built-in periodic test families are hit exactly.
pub fn tail_limsup_time(f: impl Fn(f64) -> f64, horizon: f64) -> Result<f64> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::invalid("horizon must be positive and finite"));
    }
    let m = (10.0 * horizon).ceil() as usize;
    let step = horizon / m as f64;
    let mut sup = f64::NEG_INFINITY;
    for k in 0..m {
        sup = sup.max(f(horizon + k as f64 * step));
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(i: u64, j: u64) -> Index {
        Index::grid2d(i, j).unwrap()
    }

    #[test]
    fn combine_grid() {
        assert_eq!(grid(1, 2).combine(&grid(3, 1)).unwrap(), grid(4, 3));
    }

    #[test]
    fn combine_time_identity() {
        let z = Index::time(0.0).unwrap();
        let t = Index::time(5.5).unwrap();
        assert_eq!(z.combine(&t).unwrap(), Index::Time(5.5));
    }

    #[test]
    fn combine_finite_saturating() {
        let sg = Arc::new(FiniteSemigroup::saturating(3));
        // Values 2 + 2 = min(4, 3) = 3, i.e. ids 1 + 1 -> 2.
        let two = Index::finite_elem(&sg, 1).unwrap();
        match two.combine(&two).unwrap() {
            Index::FiniteElem { id, .. } => assert_eq!(id, 2),
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn combine_rejects_variant_mismatch() {
        let err = grid(1, 1).combine(&Index::time(1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn combine_rejects_different_tables() {
        let a = Arc::new(FiniteSemigroup::saturating(3));
        let b = Arc::new(FiniteSemigroup::cyclic(4));
        let x = Index::finite_elem(&a, 0).unwrap();
        let y = Index::finite_elem(&b, 0).unwrap();
        assert!(x.combine(&y).is_err());
    }

    #[test]
    fn leq_examples() {
        assert!(grid(1, 1).leq(&grid(1, 1)).unwrap());
        assert!(!grid(1, 3).leq(&grid(2, 3)).unwrap());
        assert!(Index::time(2.0)
            .unwrap()
            .leq(&Index::time(7.0).unwrap())
            .unwrap());
    }

    #[test]
    fn constructors_validate() {
        assert!(Index::grid2d(0, 1).is_err());
        assert!(Index::time(-1.0).is_err());
        assert!(Index::time(f64::NAN).is_err());
        let sg = Arc::new(FiniteSemigroup::cyclic(4));
        assert!(Index::finite_elem(&sg, 4).is_err());
    }

    #[test]
    fn table_validation() {
        // Boolean AND: commutative and associative.
        assert!(FiniteSemigroup::new(vec![vec![0, 0], vec![0, 1]]).is_ok());
        // Right projection op(s, t) = t is not commutative.
        assert!(FiniteSemigroup::new(vec![vec![0, 1], vec![0, 1]]).is_err());
        // Symmetric but not associative: (0+0)+1 = 0 while 0+(0+1) = 1.
        assert!(FiniteSemigroup::new(vec![vec![1, 0], vec![0, 0]]).is_err());
    }

    #[test]
    fn closure_violation_rejected() {
        assert!(FiniteSemigroup::new(vec![vec![2]]).is_err());
    }

    #[test]
    fn builtin_tables_are_valid() {
        for m in 1..=8 {
            let sat = FiniteSemigroup::saturating(m);
            assert!(FiniteSemigroup::new(
                (0..m)
                    .map(|a| (0..m).map(|b| sat.combine(a, b)).collect())
                    .collect()
            )
            .is_ok());
        }
        for k in 1..=8 {
            let cyc = FiniteSemigroup::cyclic(k);
            assert!(FiniteSemigroup::new(
                (0..k)
                    .map(|a| (0..k).map(|b| cyc.combine(a, b)).collect())
                    .collect()
            )
            .is_ok());
        }
    }

    #[test]
    fn finite_leq_and_upper_bound() {
        let sat = FiniteSemigroup::saturating(3);
        // 1 <= 3 via 1+2; 3 <= 1 never.
        assert!(sat.leq(0, 2));
        assert!(!sat.leq(2, 0));
        for s in 0..3 {
            for t in 0..3 {
                assert!(sat.upper_bound(s, t).is_some());
            }
        }
    }

    #[test]
    fn tail_limsup_alternating() {
        let f = |i: u64, j: u64| if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        assert_eq!(tail_limsup_grid2d(f, 1).unwrap(), 1.0);
        assert_eq!(tail_limsup_grid2d(f, 37).unwrap(), 1.0);
    }

    #[test]
    fn tail_limsup_monotone_decay() {
        let f = |i: u64, j: u64| 1.0 / (i + j) as f64;
        let v = tail_limsup_grid2d(f, 100).unwrap();
        assert!((v - 0.005).abs() < 1e-15);
    }

    #[test]
    fn tail_limsup_periodic_time() {
        let f = |t: f64| 2.0 * (std::f64::consts::PI * t / 4.0).sin().abs();
        let v = tail_limsup_time(f, 10.0).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    #[test]
    fn shift_property_of_tail_limsup() {
        // Alternating sign: exact equality.
        let f = |i: u64, j: u64| if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let shifted = |i: u64, j: u64| f(i + 1, j + 2);
        assert_eq!(
            tail_limsup_grid2d(f, 25).unwrap(),
            tail_limsup_grid2d(shifted, 25).unwrap()
        );

        // Monotone decay: shift changes the value by O(1/h^2) << 1/h.
        let h = 100u64;
        let g = |i: u64, j: u64| 1.0 / (i + j) as f64;
        let g_shift = |i: u64, j: u64| g(i + 3, j + 5);
        let a = tail_limsup_grid2d(g, h).unwrap();
        let b = tail_limsup_grid2d(g_shift, h).unwrap();
        assert!((a - b).abs() <= 1.0 / h as f64);

        // Periodic time family: the sample grid hits the shifted peaks too.
        let p = |t: f64| 2.0 * (std::f64::consts::PI * t / 4.0).sin().abs();
        let p_shift = |t: f64| p(t + 2.0);
        let a = tail_limsup_time(p, 10.0).unwrap();
        let b = tail_limsup_time(p_shift, 10.0).unwrap();
        assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn finite_tail_limsup_is_exact() {
        let sat = FiniteSemigroup::saturating(3);
        // Tail of the top element is {top}, so the limsup is f(top).
        let v = sat.tail_limsup(|id| [7.0, -2.0, 0.5][id]);
        assert_eq!(v, 0.5);
    }

    proptest! {
        #[test]
        fn grid_combine_commutes_and_associates(
            a in 1u64..50, b in 1u64..50, c in 1u64..50,
            d in 1u64..50, e in 1u64..50, f in 1u64..50,
        ) {
            let x = grid(a, b);
            let y = grid(c, d);
            let z = grid(e, f);
            prop_assert_eq!(x.combine(&y).unwrap(), y.combine(&x).unwrap());
            prop_assert_eq!(
                x.combine(&y).unwrap().combine(&z).unwrap(),
                x.combine(&y.combine(&z).unwrap()).unwrap()
            );
        }

        #[test]
        fn grid_directedness(a in 1u64..100, b in 1u64..100, c in 1u64..100, d in 1u64..100) {
            let s = grid(a, b);
            let t = grid(c, d);
            let w = grid(a.max(c) + 1, b.max(d) + 1);
            prop_assert!(s.leq(&w).unwrap());
            prop_assert!(t.leq(&w).unwrap());
        }

        #[test]
        fn time_directedness(s in 0.0f64..1e6, t in 0.0f64..1e6) {
            let a = Index::time(s).unwrap();
            let b = Index::time(t).unwrap();
            let w = Index::time(s.max(t)).unwrap();
            prop_assert!(a.leq(&w).unwrap());
            prop_assert!(b.leq(&w).unwrap());
        }

        #[test]
        fn finite_directedness(s in 0usize..6, t in 0usize..6) {
            for sg in [FiniteSemigroup::saturating(6), FiniteSemigroup::cyclic(6)] {
                prop_assert!(sg.upper_bound(s, t).is_some());
            }
        }
    }
}
