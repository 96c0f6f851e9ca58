//! Registry of explicit Runge-Kutta Butcher tableaus.

use crate::error::{Error, Result};

const VALID_NAMES: &str = "BSRK43, RK44, BSRK85, VRK96";

/// Coefficients of an explicit Runge-Kutta method.
///
/// `a` is the full `s x s` stage matrix (strictly lower triangular), `b` the
/// quadrature weights, `c` the abscissae, and `order` the design order. Pairs
/// with an embedded error estimator carry `b_embedded`/`order_embedded`.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
    pub b_embedded: Option<Vec<f64>>,
    pub order_embedded: Option<usize>,
}

impl ButcherTableau {
    /// Validates the structural invariants and returns the tableau.
    pub fn new(
        name: &str,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: usize,
        b_embedded: Option<Vec<f64>>,
        order_embedded: Option<usize>,
    ) -> Result<Self> {
        let s = b.len();
        let fail = |reason: String| Error::InvalidTableau {
            name: name.to_string(),
            reason,
        };
        if s == 0 {
            return Err(fail("no stages".into()));
        }
        if a.len() != s || a.iter().any(|row| row.len() != s) || c.len() != s {
            return Err(fail("inconsistent dimensions".into()));
        }
        if order < 2 {
            return Err(fail(format!("design order {order} < 2")));
        }
        for (i, row) in a.iter().enumerate() {
            for (j, &aij) in row.iter().enumerate() {
                if j >= i && aij != 0.0 {
                    return Err(fail(format!("a[{i}][{j}] = {aij} is not explicit")));
                }
            }
        }
        let weight_sum: f64 = b.iter().sum();
        if (weight_sum - 1.0).abs() > 1e-14 {
            return Err(fail(format!("weights sum to {weight_sum}")));
        }
        if let Some(be) = &b_embedded {
            if be.len() != s {
                return Err(fail("embedded weight length mismatch".into()));
            }
            let esum: f64 = be.iter().sum();
            if (esum - 1.0).abs() > 1e-14 {
                return Err(fail(format!("embedded weights sum to {esum}")));
            }
        }
        for i in 0..s {
            let row_sum: f64 = a[i].iter().sum();
            if (c[i] - row_sum).abs() > 1e-14 {
                return Err(fail(format!(
                    "c[{i}] = {} but row sum is {row_sum}",
                    c[i]
                )));
            }
        }
        Ok(Self {
            name: name.to_string(),
            a,
            b,
            c,
            order,
            b_embedded,
            order_embedded,
        })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// True iff every quadrature weight is nonnegative.
///
/// The stagewise entropy estimate is only an admissible relaxation target for
/// methods with nonnegative weights.
pub fn has_nonnegative_weights(tab: &ButcherTableau) -> bool {
    tab.b.iter().all(|&bi| bi >= 0.0)
}

/// Looks up one of the built-in methods by name.
pub fn builtin_tableau(name: &str) -> Result<ButcherTableau> {
    match name {
        "BSRK43" => bsrk43(),
        "RK44" => rk44(),
        "BSRK85" => bsrk85(),
        "VRK96" => vrk96(),
        _ => Err(Error::UnknownTableau {
            name: name.to_string(),
            valid: VALID_NAMES,
        }),
    }
}

/// Names accepted by [`builtin_tableau`].
pub fn builtin_names() -> [&'static str; 4] {
    ["BSRK43", "RK44", "BSRK85", "VRK96"]
}

fn dense(s: usize, entries: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; s]; s];
    for &(i, j, v) in entries {
        a[i][j] = v;
    }
    a
}

/// Bogacki-Shampine 3(2) pair, four stages (FSAL).
fn bsrk43() -> Result<ButcherTableau> {
    let a = dense(
        4,
        &[
            (1, 0, 1.0 / 2.0),
            (2, 1, 3.0 / 4.0),
            (3, 0, 2.0 / 9.0),
            (3, 1, 1.0 / 3.0),
            (3, 2, 4.0 / 9.0),
        ],
    );
    ButcherTableau::new(
        "BSRK43",
        a,
        vec![2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0],
        vec![0.0, 1.0 / 2.0, 3.0 / 4.0, 1.0],
        3,
        Some(vec![7.0 / 24.0, 1.0 / 4.0, 1.0 / 3.0, 1.0 / 8.0]),
        Some(2),
    )
}

/// Classical four-stage fourth-order method (Kutta 1901).
fn rk44() -> Result<ButcherTableau> {
    let a = dense(4, &[(1, 0, 0.5), (2, 1, 0.5), (3, 2, 1.0)]);
    ButcherTableau::new(
        "RK44",
        a,
        vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        vec![0.0, 0.5, 0.5, 1.0],
        4,
        None,
        None,
    )
}

/// Bogacki-Shampine 5(4) pair, eight stages (FSAL).
fn bsrk85() -> Result<ButcherTableau> {
    let a = dense(
        8,
        &[
            (1, 0, 1.0 / 6.0),
            (2, 0, 2.0 / 27.0),
            (2, 1, 4.0 / 27.0),
            (3, 0, 183.0 / 1372.0),
            (3, 1, -162.0 / 343.0),
            (3, 2, 1053.0 / 1372.0),
            (4, 0, 68.0 / 297.0),
            (4, 1, -4.0 / 11.0),
            (4, 2, 42.0 / 143.0),
            (4, 3, 1960.0 / 3861.0),
            (5, 0, 597.0 / 22528.0),
            (5, 1, 81.0 / 352.0),
            (5, 2, 63099.0 / 585728.0),
            (5, 3, 58653.0 / 366080.0),
            (5, 4, 4617.0 / 20480.0),
            (6, 0, 174197.0 / 959244.0),
            (6, 1, -30942.0 / 79937.0),
            (6, 2, 8152137.0 / 19744439.0),
            (6, 3, 666106.0 / 1039181.0),
            (6, 4, -29421.0 / 29068.0),
            (6, 5, 482048.0 / 414219.0),
            (7, 0, 587.0 / 8064.0),
            (7, 2, 4440339.0 / 15491840.0),
            (7, 3, 24353.0 / 124800.0),
            (7, 4, 387.0 / 44800.0),
            (7, 5, 2152.0 / 5985.0),
            (7, 6, 7267.0 / 94080.0),
        ],
    );
    ButcherTableau::new(
        "BSRK85",
        a,
        vec![
            587.0 / 8064.0,
            0.0,
            4440339.0 / 15491840.0,
            24353.0 / 124800.0,
            387.0 / 44800.0,
            2152.0 / 5985.0,
            7267.0 / 94080.0,
            0.0,
        ],
        vec![
            0.0,
            1.0 / 6.0,
            2.0 / 9.0,
            3.0 / 7.0,
            2.0 / 3.0,
            3.0 / 4.0,
            1.0,
            1.0,
        ],
        5,
        Some(vec![
            2479.0 / 34992.0,
            0.0,
            123.0 / 416.0,
            612941.0 / 3411720.0,
            43.0 / 1440.0,
            2272.0 / 6561.0,
            79937.0 / 1113912.0,
            3293.0 / 556956.0,
        ]),
        Some(4),
    )
}

/// Verner's robust 6(5) pair, nine stages.
fn vrk96() -> Result<ButcherTableau> {
    let a = dense(
        9,
        &[
            (1, 0, 9.0 / 50.0),
            (2, 0, 29.0 / 324.0),
            (2, 1, 25.0 / 324.0),
            (3, 0, 1.0 / 16.0),
            (3, 2, 3.0 / 16.0),
            (4, 0, 79129.0 / 250000.0),
            (4, 2, -261237.0 / 250000.0),
            (4, 3, 19663.0 / 15625.0),
            (5, 0, 1336883.0 / 4909125.0),
            (5, 2, -25476.0 / 30875.0),
            (5, 3, 194159.0 / 185250.0),
            (5, 4, 8225.0 / 78546.0),
            (6, 0, -2459386.0 / 14727375.0),
            (6, 2, 19504.0 / 30875.0),
            (6, 3, 2377474.0 / 13615875.0),
            (6, 4, -6157250.0 / 5773131.0),
            (6, 5, 902.0 / 735.0),
            (7, 0, 2699.0 / 7410.0),
            (7, 2, -252.0 / 1235.0),
            (7, 3, -1393253.0 / 3993990.0),
            (7, 4, 236875.0 / 72618.0),
            (7, 5, -135.0 / 49.0),
            (7, 6, 15.0 / 22.0),
            (8, 0, 11.0 / 144.0),
            (8, 3, 256.0 / 693.0),
            (8, 5, 125.0 / 504.0),
            (8, 6, 125.0 / 528.0),
            (8, 7, 5.0 / 72.0),
        ],
    );
    ButcherTableau::new(
        "VRK96",
        a,
        vec![
            11.0 / 144.0,
            0.0,
            0.0,
            256.0 / 693.0,
            0.0,
            125.0 / 504.0,
            125.0 / 528.0,
            5.0 / 72.0,
            0.0,
        ],
        vec![
            0.0,
            9.0 / 50.0,
            1.0 / 6.0,
            1.0 / 4.0,
            53.0 / 100.0,
            3.0 / 5.0,
            4.0 / 5.0,
            1.0,
            1.0,
        ],
        6,
        Some(vec![
            28.0 / 477.0,
            0.0,
            0.0,
            212.0 / 441.0,
            -312500.0 / 366177.0,
            2125.0 / 1764.0,
            0.0,
            -2105.0 / 35532.0,
            2995.0 / 17766.0,
        ]),
        Some(5),
    )
}

// ---------------------------------------------------------------------------
// Order conditions via rooted trees
// ---------------------------------------------------------------------------

/// A rooted tree, stored as the sorted multiset of its subtrees.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Tree(Vec<Tree>);

impl Tree {
    fn order(&self) -> usize {
        1 + self.0.iter().map(Tree::order).sum::<usize>()
    }

    fn density(&self) -> f64 {
        self.order() as f64 * self.0.iter().map(Tree::density).product::<f64>()
    }
}

/// All distinct rooted trees with exactly `n` vertices.
fn rooted_trees(n: usize) -> Vec<Tree> {
    fn forests(total: usize) -> Vec<Vec<Tree>> {
        if total == 0 {
            return vec![vec![]];
        }
        let mut out: std::collections::BTreeSet<Vec<Tree>> = Default::default();
        for k in 1..=total {
            for t in rooted_trees(k) {
                for mut rest in forests(total - k) {
                    rest.push(t.clone());
                    rest.sort();
                    out.insert(rest);
                }
            }
        }
        out.into_iter().collect()
    }
    forests(n - 1).into_iter().map(Tree).collect()
}

/// Stagewise elementary weight of `tree`.
fn elementary_weight(tree: &Tree, a: &[Vec<f64>]) -> Vec<f64> {
    let s = a.len();
    let mut phi = vec![1.0; s];
    for child in &tree.0 {
        let pc = elementary_weight(child, a);
        for i in 0..s {
            let api: f64 = (0..s).map(|j| a[i][j] * pc[j]).sum();
            phi[i] *= api;
        }
    }
    phi
}

/// Maximum order-condition residual of `tab` over all rooted trees up to
/// order `q` (1 <= q <= 6).
pub fn check_order_conditions(tab: &ButcherTableau, q: usize) -> Result<f64> {
    check_order_conditions_weights(tab, &tab.b, q)
}

/// Same as [`check_order_conditions`] but for an arbitrary weight vector,
/// allowing embedded weights to be verified against their own design order.
pub fn check_order_conditions_weights(
    tab: &ButcherTableau,
    weights: &[f64],
    q: usize,
) -> Result<f64> {
    if !(1..=6).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "order-condition check supports 1 <= q <= 6, got {q}"
        )));
    }
    if weights.len() != tab.stages() {
        return Err(Error::InvalidArgument(
            "weight vector length does not match stage count".into(),
        ));
    }
    let mut worst = 0.0f64;
    for n in 1..=q {
        for tree in rooted_trees(n) {
            let phi = elementary_weight(&tree, &tab.a);
            let lhs: f64 = weights.iter().zip(&phi).map(|(b, p)| b * p).sum();
            let resid = (lhs - 1.0 / tree.density()).abs();
            worst = worst.max(resid);
        }
    }
    Ok(worst)
}
