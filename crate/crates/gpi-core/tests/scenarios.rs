//! Cross-module flows: descriptor JSON -> algebra -> template JSON ->
//! compiled system -> solution space, with the materialized and streaming
//! routes checked against each other.

use gpi_core::addmap::AdditiveMap;
use gpi_core::algebra::{AlgebraDescriptor, FiniteAlgebra};
use gpi_core::expr;
use gpi_core::identity::{self, Mode};
use gpi_core::solver::{self, IdentityTemplate};
use gpi_core::DEFAULT_BUDGET;

/// The nullspace of the materialized system must have the same dimension as
/// the streaming solver's basis, for both unit-domain and full-domain
/// identities.
#[test]
fn materialized_compile_agrees_with_streaming_solve() {
    let cases: Vec<IdentityTemplate> = vec![
        IdentityTemplate::power_identity(&FiniteAlgebra::galois_field(5, 1, None).unwrap(), 6)
            .unwrap(),
        IdentityTemplate::power_identity(&FiniteAlgebra::galois_field(3, 2, None).unwrap(), 12)
            .unwrap(),
        IdentityTemplate::power_identity(&FiniteAlgebra::matrix_algebra(2, 3, 1, None).unwrap(), 3)
            .unwrap(),
        {
            let a = FiniteAlgebra::galois_field(3, 2, None).unwrap();
            let g = expr::parse_expr("X", &a, 1).unwrap();
            let h = expr::parse_expr("X^2", &a, 1).unwrap();
            IdentityTemplate::poly_map_identity(&g, &h).unwrap()
        },
    ];
    for t in &cases {
        let sys = solver::compile(t, DEFAULT_BUDGET).unwrap();
        let space = solver::solve(t, DEFAULT_BUDGET).unwrap();
        let null_dim = sys.matrix.nullspace().len();
        assert_eq!(
            null_dim,
            space.dimension(),
            "materialized nullspace vs streaming basis"
        );
        // Each streaming basis tuple is killed by the materialized matrix.
        for tuple in &space.basis {
            let mut stacked = Vec::new();
            for m in tuple {
                for row in m.rows() {
                    stacked.extend(row);
                }
            }
            let image = sys.matrix.mul_vec(&stacked);
            assert!(image.iter().all(|&v| v == 0));
        }
    }
}

/// An algebra that has traveled through descriptor JSON supports the whole
/// pipeline: parsing, identity checking, template solving.
#[test]
fn descriptor_round_trip_supports_full_pipeline() {
    let original = FiniteAlgebra::matrix_algebra(2, 3, 1, None).unwrap();
    let json = original.descriptor().to_json();
    let reloaded = FiniteAlgebra::build(AlgebraDescriptor::from_json(&json).unwrap()).unwrap();
    assert_eq!(original, reloaded);

    let g = expr::parse_expr("X1*X2-X2*X1", &reloaded, 2).unwrap();
    let v = identity::is_gpi(&g, Mode::Exhaustive, DEFAULT_BUDGET).unwrap();
    assert!(!v.holds);

    let template_json = r#"{
        "unknowns": 2, "domain": "units",
        "terms": [{"L": "1", "slot": 0, "arg": "x", "R": "1"},
                  {"L": "-x^3", "slot": 1, "arg": "xinv", "R": "1"}],
        "rhs": "0"
    }"#;
    let t = IdentityTemplate::from_json(template_json, &reloaded).unwrap();
    let s = solver::solve(&t, DEFAULT_BUDGET).unwrap();
    assert_eq!(s.dimension(), 0);

    // Structure-aware maps survive the round trip too.
    let tr = AdditiveMap::transpose(&reloaded).unwrap();
    let pairs = solver::elementary_decomposition(&tr, 16).unwrap();
    assert_eq!(AdditiveMap::elementary(&reloaded, &pairs).unwrap(), tr);
}
