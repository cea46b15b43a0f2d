//! Published error tables the convergence studies are compared against.

/// Static regularization errors for `K = 200`, `dx = 2^-1 .. 2^-9`, indexed by
/// `k = 2, 3, 4`.
pub const STATIC_ERRORS: [(usize, [f64; 9]); 3] = [
    (
        2,
        [5.7e-1, 2.8e-1, 6.9e-2, 1.5e-2, 4.5e-3, 1.3e-3, 3.2e-4, 7.5e-5, 2.0e-5],
    ),
    (
        3,
        [4.2e-1, 6.9e-2, 1.0e-2, 1.3e-3, 1.4e-4, 2.0e-5, 2.5e-6, 3.1e-7, 3.8e-8],
    ),
    (
        4,
        [2.8e-1, 1.5e-2, 1.3e-3, 7.5e-5, 4.8e-6, 3.1e-7, 1.9e-8, 1.1e-9, 7.3e-11],
    ),
];

/// Manufactured-solution `L1` errors at `N_x = 320, 640, 1280`.
pub const MANUFACTURED_CELLS: [usize; 3] = [320, 640, 1280];
pub const MANUFACTURED_ERRORS: [(usize, [f64; 3]); 3] = [
    (2, [5.5530e-4, 1.4088e-4, 3.6005e-5]),
    (3, [3.0206e-6, 3.8838e-7, 4.8748e-8]),
    (4, [3.0056e-8, 1.9219e-9, 1.1919e-10]),
];

pub fn static_errors(k: usize) -> Option<&'static [f64; 9]> {
    STATIC_ERRORS.iter().find(|(kk, _)| *kk == k).map(|(_, e)| e)
}

pub fn manufactured_errors(k: usize) -> Option<&'static [f64; 3]> {
    MANUFACTURED_ERRORS.iter().find(|(kk, _)| *kk == k).map(|(_, e)| e)
}

/// Outcome of comparing one row against its reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCheck {
    pub resolution: f64,
    pub error: f64,
    pub reference: f64,
    pub ratio: f64,
    pub within_factor: bool,
    /// `None` for rows outside the order window.
    pub order_ok: Option<bool>,
}

/// Checks each error against its reference within a multiplicative `factor`,
/// and the observed order on the last `order_rows` rows within `order_tol`
/// of `expected_order`.
pub fn compare_rows(
    rows: &[super::ConvergenceRow],
    reference: &[f64],
    factor: f64,
    expected_order: f64,
    order_rows: usize,
    order_tol: f64,
) -> Vec<RowCheck> {
    let start = rows.len().saturating_sub(order_rows);
    rows.iter()
        .zip(reference)
        .enumerate()
        .map(|(i, (row, &r))| {
            let ratio = row.error / r;
            RowCheck {
                resolution: row.resolution,
                error: row.error,
                reference: r,
                ratio,
                within_factor: ratio <= factor && ratio >= 1.0 / factor,
                order_ok: (i >= start).then(|| row.order.is_none_or(|o| (o - expected_order).abs() <= order_tol)),
            }
        })
        .collect()
}
