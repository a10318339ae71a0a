use eegaug_core::numerics::gradcheck::{adjoint_suite, gradient_suite};

#[test]
fn every_primitive_matches_central_differences() {
    for r in gradient_suite(20, 7).unwrap() {
        assert!(r.max_rel_error < 1e-4, "{}: {:e}", r.primitive, r.max_rel_error);
    }
}

#[test]
fn conv_transpose_is_the_adjoint_of_conv() {
    let gap = adjoint_suite(50, 3).unwrap();
    assert!(gap < 1e-10, "adjoint gap {gap:e}");
}
