use cornerflow::gas::BernoulliState;
use cornerflow::incompressible::FlowField;
use cornerflow::{BodyF32, ComplexFlowF32, FarFieldF32, GasModelF32};
use num_complex::Complex;

#[test]
fn circle_flow_in_single_precision() {
    let flow = ComplexFlowF32::circle(1.0, FarFieldF32::new(Complex::new(1.0, 0.0), 0.0)).unwrap();
    let top = flow.velocity(Complex::new(0.0, 1.0)).unwrap();
    assert!((top.re - 2.0).abs() < 1e-6);
    assert!(flow.stream(Complex::new(1.0, 0.0)).unwrap().abs() < 1e-6);
}

#[test]
fn gas_inversions_in_single_precision() {
    let gas = GasModelF32::air();
    let state = BernoulliState::from_free_stream(&gas, 0.5f32).unwrap();
    let rho = state.density_from_speed(&gas, 0.3).unwrap();
    let m = rho * rho * 0.09 / 2.0;
    let back = state.density_from_flux(&gas, m).unwrap().density;
    assert!((back - rho).abs() < 1e-5 * rho);
}

#[test]
fn bodies_in_single_precision() {
    let plate = BodyF32::flat_plate(4.0, 0.5).unwrap();
    assert_eq!(plate.corners.len(), 2);
    assert!((plate.circumradius() - 2.0).abs() < 1e-6);
}
