use stcphase::lindblad::{extract_channel, InitialCavity, SimOptions};
use stcphase::sweep::{operating_point, RunConfig};
use stcphase::Error;

#[test]
fn reference_run_preserves_trace_and_hermiticity() {
    let e = operating_point(&RunConfig::default()).unwrap();
    let ex = extract_channel(
        &e.params,
        e.gamma_phi,
        e.gamma_phi,
        InitialCavity::Vacuum,
        &SimOptions::default(),
    )
    .unwrap();
    let d = &ex.diagnostics;
    assert!(d.max_trace_drift < 1e-8, "{}", d.max_trace_drift);
    assert!(d.max_hermiticity_error < 1e-10, "{}", d.max_hermiticity_error);
    assert!(d.max_top_level_pop < 1e-4);
    assert!(ex.reconstruction_residual < 1e-8);
    // 20 ps steps over the ~7.3 ns gate
    assert_eq!(d.steps, 365);
}

#[test]
fn small_fock_space_trips_guard() {
    let e = operating_point(&RunConfig::default()).unwrap();
    let opts = SimOptions {
        fock_dim: 3,
        ..SimOptions::default()
    };
    match extract_channel(&e.params, 0.0, 0.0, InitialCavity::Vacuum, &opts) {
        Err(Error::Diagnostic { diagnostics, .. }) => assert!(diagnostics.max_top_level_pop > 1e-4),
        other => panic!("expected a diagnostic failure, got {:?}", other.map(|x| x.fock_dim)),
    }
}
