use serde::Serialize;

use super::{xor_fiber, Protocol, SmpQuantumProtocol, TwoWayEntangledProtocol};
use crate::error::{invalid, Result};
use crate::hyperfourier::{
    fourier, level_mass, matrix_fourier, MatrixValuedFunction, AUDIT_SLACK,
};

/// What kind of protocol a growth report is about; SMP protocols get the full
/// chain of explicit bounds, two-way ones only the asymptotic reference.
#[derive(Clone, Copy)]
pub enum ProtocolRef<'a> {
    Smp(&'a SmpQuantumProtocol),
    TwoWay(&'a TwoWayEntangledProtocol),
    Other(&'a dyn Protocol),
}

impl ProtocolRef<'_> {
    fn protocol(&self) -> &dyn Protocol {
        match *self {
            Self::Smp(p) => p,
            Self::TwoWay(p) => p,
            Self::Other(p) => p,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub ell: usize,
    /// `L_{1,ell}(H)` of the XOR-fiber.
    pub measured: f64,
    /// `sum_{|S|=ell} Tr|rho^(S)| Tr|sigma^(S)|`.
    pub product_sum: Option<f64>,
    /// Twice the product sum.
    pub intermediate: Option<f64>,
    /// `2 sqrt(sum Tr|rho^(S)|^2) sqrt(sum Tr|sigma^(S)|^2)`.
    pub cauchy_schwarz: Option<f64>,
    /// `c^ell 2^{5d}`, juxtaposed only.
    pub reference: Option<f64>,
    /// `measured <= intermediate <= cauchy_schwarz`, when applicable.
    pub chain_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub kind: &'static str,
    pub rows: Vec<GrowthRow>,
}

impl GrowthReport {
    /// True unless some asserted chain fails.
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.chain_holds != Some(false))
    }
}

fn level_sums(norms_a: &[f64], norms_b: &[f64], ell: usize) -> (f64, f64, f64) {
    let mut prod = 0.0;
    let mut sa = 0.0;
    let mut sb = 0.0;
    for s in (0..norms_a.len()).filter(|s| s.count_ones() as usize == ell) {
        prod += norms_a[s] * norms_b[s];
        sa += norms_a[s] * norms_a[s];
        sb += norms_b[s] * norms_b[s];
    }
    (prod, sa.sqrt(), sb.sqrt())
}

pub fn fourier_growth_report(p: ProtocolRef<'_>, ell_max: usize) -> Result<GrowthReport> {
    let proto = p.protocol();
    let n = proto.n();
    if ell_max > n {
        return Err(invalid(format!("ell_max {ell_max} exceeds n = {n}")));
    }
    let spec = fourier(&xor_fiber(proto)?.to_table());
    let norms = match p {
        ProtocolRef::Smp(s) => {
            let fa = MatrixValuedFunction::new(n, s.prep_a().to_vec())?;
            let fb = MatrixValuedFunction::new(n, s.prep_b().to_vec())?;
            Some((
                matrix_fourier(&fa).trace_norms(),
                matrix_fourier(&fb).trace_norms(),
            ))
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(ell_max + 1);
    for ell in 0..=ell_max {
        let measured = level_mass(&spec, ell)?;
        let mut row = GrowthRow {
            ell,
            measured,
            product_sum: None,
            intermediate: None,
            cauchy_schwarz: None,
            reference: None,
            chain_holds: None,
        };
        if let Some((na, nb)) = &norms {
            let (prod, ra, rb) = level_sums(na, nb, ell);
            let intermediate = 2.0 * prod;
            let cs = 2.0 * ra * rb;
            row.product_sum = Some(prod);
            row.intermediate = Some(intermediate);
            row.cauchy_schwarz = Some(cs);
            row.chain_holds =
                Some(measured <= intermediate + AUDIT_SLACK && intermediate <= cs + AUDIT_SLACK);
        }
        if let ProtocolRef::TwoWay(t) = p {
            row.reference = Some((t.c() as f64).powi(ell as i32) * 2f64.powi(5 * t.d() as i32));
        }
        rows.push(row);
    }
    let kind = match p {
        ProtocolRef::Smp(_) => "smp",
        ProtocolRef::TwoWay(_) => "two-way",
        ProtocolRef::Other(_) => "other",
    };
    Ok(GrowthReport { kind, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperfourier::fourier;
    use crate::protocol::{random_smp, random_two_way, FnProtocol};
    use crate::qcore::linalg::kron;

    #[test]
    fn constant_protocol() {
        let p = FnProtocol::new(3, |_, _| 1.0);
        let r = fourier_growth_report(ProtocolRef::Other(&p), 3).unwrap();
        assert!((r.rows[0].measured - 1.0).abs() < 1e-15);
        assert!(r.rows[1..].iter().all(|row| row.measured == 0.0));
    }

    #[test]
    fn constant_smp_bounds_at_least_one() {
        use crate::qcore::linalg::identity;
        use crate::qcore::DensityMatrix;
        let states = vec![DensityMatrix::basis(1, 0); 4];
        let p = SmpQuantumProtocol::new(2, states.clone(), states, identity(4)).unwrap();
        let r = fourier_growth_report(ProtocolRef::Smp(&p), 2).unwrap();
        let row = &r.rows[0];
        assert!((row.measured - 1.0).abs() < 1e-12);
        assert!(row.intermediate.unwrap() >= 1.0 && row.cauchy_schwarz.unwrap() >= 1.0);
        assert!(r.holds());
    }

    #[test]
    fn fiber_coefficients_factor_through_message_spectra() {
        // H^(S) = Tr(E (rho^(S) ⊗ sigma^(S))).
        let mut rng = crate::seed::rng(71);
        let p = random_smp(3, 1, &mut rng);
        let h = fourier(&xor_fiber(&p).unwrap().to_table());
        let ra = matrix_fourier(&MatrixValuedFunction::new(3, p.prep_a().to_vec()).unwrap());
        let rb = matrix_fourier(&MatrixValuedFunction::new(3, p.prep_b().to_vec()).unwrap());
        for s in 0..8 {
            let v = (p.effect() * kron(ra.coefficient(s), rb.coefficient(s))).trace();
            assert!((v.re - h.coefficient(s)).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn random_smp_chain_holds() {
        let mut rng = crate::seed::rng(72);
        for c in [1, 2] {
            let p = random_smp(4, c, &mut rng);
            let r = fourier_growth_report(ProtocolRef::Smp(&p), 4).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn two_way_without_entanglement_reports() {
        let mut rng = crate::seed::rng(73);
        let p = random_two_way(2, 0, 1, 1, &mut rng);
        let r = fourier_growth_report(ProtocolRef::TwoWay(&p), 2).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows.iter().all(|row| row.measured.is_finite() && row.chain_holds.is_none()));
        assert_eq!(r.rows[2].reference, Some(4.0));
    }
}
