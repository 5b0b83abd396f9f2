//! Frozen artifacts: a hand-built two-way protocol and the one-bit classical
//! optimum at (n, m) = (4, 1).
//!
//! Set `QCOMM_BLESS=1` to rewrite the protocol file after an intentional
//! format change.

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use qcomm::bhm::brute_force_one_way;
use qcomm::exact::RatioDoc;
use qcomm::protocol::{eval_two_way, transcript_distribution, TwoWayEntangledProtocol};
use qcomm::qcore::linalg::{identity, kron, ket_bra, real, CMatrix};
use qcomm::qcore::{MeasurementFamily, StateVector};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Projector onto `(|0> + s|1>)/sqrt2` tensored with the identity on memory.
fn x_basis(s: f64) -> CMatrix {
    let p = (ket_bra(2, 0, 0) + ket_bra(2, 1, 1) + (ket_bra(2, 0, 1) + ket_bra(2, 1, 0)) * real(s)) * real(0.5);
    kron(&p, &identity(2))
}

fn z_basis(b: usize) -> CMatrix {
    kron(&ket_bra(2, b, b), &identity(2))
}

/// One round on a shared EPR pair. Alice measures her half in the Z basis on
/// `x = 0` and the X basis on `x = 1`; Bob always measures Z. The output is
/// `-1` exactly when the two bits differ.
fn hand_built() -> TwoWayEntangledProtocol {
    let alice = vec![vec![
        vec![MeasurementFamily::new(vec![z_basis(0), z_basis(1)]).unwrap()],
        vec![MeasurementFamily::new(vec![x_basis(1.0), x_basis(-1.0)]).unwrap()],
    ]];
    let bob_fam = MeasurementFamily::new(vec![z_basis(0), z_basis(1)]).unwrap();
    let bob = vec![vec![vec![bob_fam.clone(), bob_fam.clone()], vec![bob_fam.clone(), bob_fam]]];
    TwoWayEntangledProtocol::new(1, 1, 1, StateVector::epr().to_density(), alice, bob, vec![0b01, 0b10]).unwrap()
}

#[test]
fn two_way_protocol_file() {
    let p = hand_built();
    let path = data("two_way_epr.json");
    if std::env::var_os("QCOMM_BLESS").is_some() {
        std::fs::write(&path, p.to_json()).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stored, p.to_json());

    let loaded = TwoWayEntangledProtocol::from_json(&stored).unwrap();
    assert_eq!(loaded.to_json(), stored);
    for y in 0..2 {
        // Z/Z on an EPR pair always agrees; X/Z is uncorrelated.
        assert!((eval_two_way(&loaded, 0, y).unwrap() - 1.0).abs() < 1e-12);
        assert!(eval_two_way(&loaded, 1, y).unwrap().abs() < 1e-12);
        let dist = transcript_distribution(&loaded, 1, y).unwrap();
        assert!(dist.iter().all(|p| (p - 0.25).abs() < 1e-12));
    }
}

#[test]
fn classical_oracle_matches_golden_rational() {
    let stored = std::fs::read_to_string(data("golden_classical_oracle.json")).unwrap();
    let doc: RatioDoc = serde_json::from_str(&stored).unwrap();
    let golden = doc.decode().unwrap();
    assert_eq!(golden, BigRational::new(BigInt::from(1), BigInt::from(3)));
    let opt = brute_force_one_way(4, 1, 1).unwrap();
    assert_eq!(opt.advantage, golden);
}
