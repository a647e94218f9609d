use sphreg::special::bessel_k;
use sphreg_oracle::bessel_k_scaled;

#[test]
fn matches_quadrature_over_orders_and_arguments() {
    let orders = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let args = [1e-6, 1e-3, 0.05, 0.5, 1.0, 1.999, 2.0, 2.001, 3.7, 10.0, 55.0, 300.0, 700.0];
    for &nu in &orders {
        for &x in &args {
            let got = bessel_k(nu, x).unwrap().scaled_value;
            let want = bessel_k_scaled(nu, x);
            let rel = (got - want).abs() / want;
            assert!(rel < 1e-12, "nu={nu} x={x} got={got:e} want={want:e} rel={rel:e}");
        }
    }
}

#[test]
fn log_value_matches_quadrature_at_moderate_arguments() {
    for &(nu, x) in &[(1.0, std::f64::consts::SQRT_2), (1.0, 5.0), (0.5, 0.7), (3.0, 0.01)] {
        let got = bessel_k(nu, x).unwrap().log_value;
        let want = bessel_k_scaled(nu, x).ln() - x;
        assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "nu={nu} x={x}");
    }
}
