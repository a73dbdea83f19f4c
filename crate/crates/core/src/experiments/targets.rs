//! Published values the reproduction is checked against.

/// Series index pairs in table order: `(X1,X2), (X1,X3), (X2,X3)`.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// First-order MI of every pair with the inactive state present, in bits.
pub const TABLE1_MI: f64 = 0.9183;
/// METC with the inactive state present.
pub const TABLE1_METC: [f64; 3] = [0.1277, 0.1277, 0.2766];
/// METC after removing the inactive instants.
pub const TABLE2_METC: [f64; 3] = [0.0, 0.0, 0.0968];
/// Four-decimal table precision.
pub const TABLE_TOLERANCE: f64 = 5e-5;
pub const MI_TOLERANCE: f64 = 5e-5;

/// Lag-12 TE between X2 and X3 (a natural-log value, ln 3).
pub const TE_LAG12_FULL: f64 = 1.0986;
/// Lag-12 TE between X2' and X3' (ln 2).
#[allow(clippy::approx_constant)]
pub const TE_LAG12_PRIMED: f64 = 0.6931;
pub const TE_TOLERANCE: f64 = 1e-3;
pub const TE_LAGS: usize = 12;
pub const TE_SURROGATES: usize = 100;
pub const TE_LEVEL: f64 = 0.05;

/// Lag with the highest autocorrelation of X1 over lags 1..=20.
pub const ACF_PEAK_LAG: usize = 12;
pub const ACF_MAX_LAG: usize = 20;

/// `(1/3) log2 3 + (2/3) log2(3/2)`: MI of two ternary series with
/// coincident zeros at rate 1/3 and independent balanced signs elsewhere.
pub fn first_order_mi_closed_form() -> f64 {
    (1.0 / 3.0) * 3f64.log2() + (2.0 / 3.0) * 1.5f64.log2()
}
