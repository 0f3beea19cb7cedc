//! CPTP maps in Kraus form and their action on states and measurements.
//!
//! Besides the generic [`KrausChannel`], this module carries three named
//! constructions: the local map that turns a classically-correlated state
//! into a discordant one, the decohering map built from a pair of bases, and
//! the CNOT that converts single-qubit coherence into entanglement.

use crate::boxes::MeasurementFamily;
use crate::error::Error;
use crate::qmath::{
    basis_ket, c, cr, identity, kron, max_abs_diff, CMatrix, CVector, DensityMatrix, PureState,
};
use crate::tol;
use crate::Result;

/// A completely positive trace-preserving map `ρ ↦ Σᵢ Kᵢ ρ Kᵢ†`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    /// Builds a channel from its Kraus operators, checking `Σ Kᵢ†Kᵢ = I`.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidParameter(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let dim_out = kraus[0].nrows();
        let dim_in = kraus[0].ncols();
        if kraus
            .iter()
            .any(|k| k.nrows() != dim_out || k.ncols() != dim_in)
        {
            return Err(Error::Dimension(
                "all Kraus operators must share one shape".into(),
            ));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &identity(dim_in));
        if dev > tol::COMPLETENESS {
            return Err(Error::NotTracePreserving { deviation: dev });
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    /// The identity channel on `C^d`.
    pub fn identity_channel(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![identity(d)],
        }
    }

    /// The fully depolarizing channel `ρ ↦ I/d · tr ρ`, realised by the d²
    /// Heisenberg-Weyl displacements `XᵐZⁿ/d`.
    pub fn depolarizing(d: usize) -> Self {
        let omega = std::f64::consts::TAU / d as f64;
        let mut shift = CMatrix::zeros(d, d);
        let mut clock = CMatrix::zeros(d, d);
        for k in 0..d {
            shift[((k + 1) % d, k)] = cr(1.0);
            clock[(k, k)] = c((omega * k as f64).cos(), (omega * k as f64).sin());
        }
        let mut kraus = Vec::with_capacity(d * d);
        let mut xm = identity(d);
        for _ in 0..d {
            let mut xz = xm.clone();
            for _ in 0..d {
                kraus.push(&xz / cr(d as f64));
                xz *= &clock;
            }
            xm = &shift * xm;
        }
        Self {
            dim_in: d,
            dim_out: d,
            kraus,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Applies the channel to a single-system state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim_a() != 1 && rho.dim_b() != 1 {
            return Err(Error::Dimension(
                "apply expects a single-system state; use local_apply for bipartite ones".into(),
            ));
        }
        if rho.dim() != self.dim_in {
            return Err(Error::Dimension(format!(
                "channel input is {}-dimensional, state is {}-dimensional",
                self.dim_in,
                rho.dim()
            )));
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        DensityMatrix::single(out)
    }
}

/// Applies `chA ⊗ chB` to a bipartite state.
pub fn local_apply(
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix> {
    if rho.dim_a() != ch_a.dim_in || rho.dim_b() != ch_b.dim_in {
        return Err(Error::Dimension(format!(
            "state is {}⊗{} but channels expect {}⊗{}",
            rho.dim_a(),
            rho.dim_b(),
            ch_a.dim_in,
            ch_b.dim_in
        )));
    }
    let d_out = ch_a.dim_out * ch_b.dim_out;
    let mut out = CMatrix::zeros(d_out, d_out);
    for ka in &ch_a.kraus {
        for kb in &ch_b.kraus {
            let k = kron(ka, kb);
            out += &k * rho.matrix() * k.adjoint();
        }
    }
    DensityMatrix::new(ch_a.dim_out, ch_b.dim_out, out)
}

/// The qubit map `Φ(ρ) = |0⟩⟨0| ρ |0⟩⟨0| + |+⟩⟨1| ρ |1⟩⟨+|`.
///
/// Applied to each side of a classically-correlated state it produces a
/// discordant output while acting locally — the working example that local
/// operations can create discord but not correlation-rank.
pub fn discord_creating_phi() -> KrausChannel {
    let zero = basis_ket(2, 0);
    let one = basis_ket(2, 1);
    let plus = crate::states::ket_plus();
    let k0 = &zero * zero.adjoint();
    let k1 = &plus * one.adjoint();
    KrausChannel::new(vec![k0, k1]).expect("|0⟩⟨0|, |+⟩⟨1| sum to identity")
}

/// The decohering map with Kraus operators `Kᵢ = |χᵢ⟩⟨φᵢ|`.
///
/// Reads out in the `φ` basis and reprepares in the `χ` basis, so every
/// output is diagonal in `χ` regardless of the input. The Kraus operators of
/// any such basis pair are mutually orthogonal (`Kᵢ†Kⱼ = 0` for `i ≠ j`),
/// which the constructor checks alongside orthonormality of both bases.
pub fn decohering_map(phi_basis: &[CVector], chi_basis: &[CVector]) -> Result<KrausChannel> {
    if phi_basis.len() != chi_basis.len() {
        return Err(Error::Dimension(
            "φ and χ bases must have equal cardinality".into(),
        ));
    }
    crate::qmath::check_orthonormal(phi_basis)?;
    crate::qmath::check_orthonormal(chi_basis)?;
    let kraus: Vec<CMatrix> = phi_basis
        .iter()
        .zip(chi_basis)
        .map(|(phi, chi)| chi * phi.adjoint())
        .collect();
    for (i, ki) in kraus.iter().enumerate() {
        for (j, kj) in kraus.iter().enumerate() {
            if i != j {
                let cross = (ki.adjoint() * kj).norm();
                debug_assert!(
                    cross <= 1e-10,
                    "K†ᵢKⱼ should vanish for i ≠ j, got norm {cross}"
                );
            }
        }
    }
    KrausChannel::new(kraus)
}

/// Pulls a measurement family back through a channel: every effect `M`
/// becomes `Σᵢ Kᵢ† M Kᵢ`.
///
/// This is the Heisenberg-picture adjoint, so the defining identity is
/// `tr(Φ(ρ) M) = tr(ρ Φ†(M))`: measuring the *output* of the channel with
/// `M` is the same as measuring the *input* with the conjugated effects.
/// The conjugated family lives on the channel's input space and is again a
/// valid POVM (positivity is preserved by conjugation and completeness by
/// trace preservation).
pub fn conjugate_measurements(
    ch: &KrausChannel,
    povms: &MeasurementFamily,
) -> Result<MeasurementFamily> {
    if povms.dim() != ch.dim_out {
        return Err(Error::Dimension(format!(
            "effects act on dimension {}, channel output is {}",
            povms.dim(),
            ch.dim_out
        )));
    }
    let mut settings = Vec::with_capacity(povms.n_settings());
    for x in 0..povms.n_settings() {
        let mut effects = Vec::with_capacity(povms.n_outcomes());
        for a in 0..povms.n_outcomes() {
            let m = povms.effect(x, a);
            let mut conj = CMatrix::zeros(ch.dim_in, ch.dim_in);
            for k in &ch.kraus {
                conj += k.adjoint() * m * k;
            }
            effects.push(conj);
        }
        settings.push(effects);
    }
    MeasurementFamily::from_effects(settings)
}

/// Conjugates a two-qubit pure state by the CNOT `|i,j⟩ ↦ |i, i⊕j⟩`.
///
/// With the ancilla in `|0⟩` this converts single-qubit coherence into
/// two-qubit correlation: `|+⟩⊗|0⟩ ↦ |Φ⁺⟩`.
pub fn cnot_convert(input: &PureState) -> Result<DensityMatrix> {
    if input.dim() != 4 {
        return Err(Error::Dimension(format!(
            "CNOT conversion needs a two-qubit input, got dimension {}",
            input.dim()
        )));
    }
    let mut u = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            u[(2 * i + (i ^ j), 2 * i + j)] = cr(1.0);
        }
    }
    let psi = &u * input.amplitudes();
    DensityMatrix::new(2, 2, &psi * psi.adjoint())
}
