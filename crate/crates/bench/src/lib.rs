//! Benchmark fixtures shared by the criterion targets.

use remetrica::{BoxDomain, Ifs, MapSpec, MetricSpace};

/// `{√x, x/2}` on `[0, 1]`.
pub fn sqrt_half() -> Ifs {
    Ifs::new(
        MetricSpace::euclidean(BoxDomain::unit_interval()),
        vec![MapSpec::sqrt(), MapSpec::affine_1d(0.5, 0.0)],
    )
    .expect("valid system")
}

/// Middle-thirds Cantor system on `[0, 1]`.
pub fn cantor() -> Ifs {
    Ifs::new(
        MetricSpace::euclidean(BoxDomain::unit_interval()),
        vec![
            MapSpec::affine_1d(1.0 / 3.0, 0.0),
            MapSpec::affine_1d(1.0 / 3.0, 2.0 / 3.0),
        ],
    )
    .expect("valid system")
}
