// SPDX-License-Identifier: Apache-2.0

//! Ideal target unitaries on the relabeled qubit register.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::dynamics::GateTarget;
use crate::error::SynthError;
use crate::numeric::{expm, kron, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateName {
    X90Q1,
    X90Q2,
    Y90Q2,
    Z90Q1,
    Z90Q2,
    Iswap,
    SqrtIswap,
    DoubleIswap,
    Cz,
    Cx,
    Cccz,
    Cccx,
    Identity,
}

impl GateName {
    pub const ALL: [GateName; 13] = [
        GateName::X90Q1,
        GateName::X90Q2,
        GateName::Y90Q2,
        GateName::Z90Q1,
        GateName::Z90Q2,
        GateName::Iswap,
        GateName::SqrtIswap,
        GateName::DoubleIswap,
        GateName::Cz,
        GateName::Cx,
        GateName::Cccz,
        GateName::Cccx,
        GateName::Identity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::X90Q1 => "X90_Q1",
            GateName::X90Q2 => "X90_Q2",
            GateName::Y90Q2 => "Y90_Q2",
            GateName::Z90Q1 => "Z90_Q1",
            GateName::Z90Q2 => "Z90_Q2",
            GateName::Iswap => "ISWAP",
            GateName::SqrtIswap => "SQRT_ISWAP",
            GateName::DoubleIswap => "DOUBLE_ISWAP",
            GateName::Cz => "CZ",
            GateName::Cx => "CX",
            GateName::Cccz => "CCCZ",
            GateName::Cccx => "CCCX",
            GateName::Identity => "IDENTITY",
        }
    }

    /// Number of transmons the gate acts on.
    pub fn transmons(self) -> usize {
        match self {
            GateName::Cz | GateName::Cx | GateName::Cccz | GateName::Cccx => 2,
            _ => 1,
        }
    }

    pub fn dim(self) -> usize {
        if self.transmons() == 2 {
            16
        } else {
            4
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateName {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateName::ALL
            .into_iter()
            .find(|g| g.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| SynthError::InvalidInput(format!("unknown gate name {s:?}")))
    }
}

/// e^{+iπ/4·σ}.
fn quarter_turn(sigma: &ComplexMatrix) -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let s = FRAC_PI_4.sin();
    &ComplexMatrix::identity(2).scale_real(FRAC_PI_4.cos()) + &sigma.scale(i * s)
}

fn exp_i(generator: &ComplexMatrix, angle: f64) -> ComplexMatrix {
    expm(&generator.scale(C64::new(0.0, angle))).expect("square generator")
}

fn controlled_on_last(control_mask: usize, target_bit: usize, action: &ComplexMatrix) -> ComplexMatrix {
    // Applies `action` to bit `target_bit` (0 = least significant) when all
    // bits in `control_mask` are set.
    let mut m = ComplexMatrix::identity(16).into_dmatrix();
    let t = 1 << target_bit;
    for b in 0..16 {
        if b & control_mask == control_mask && b & t == 0 {
            let (lo, hi) = (b, b | t);
            m[(lo, lo)] = action.get(0, 0);
            m[(lo, hi)] = action.get(0, 1);
            m[(hi, lo)] = action.get(1, 0);
            m[(hi, hi)] = action.get(1, 1);
        }
    }
    ComplexMatrix::from_dmatrix(m).expect("finite entries")
}

/// exp(iπ/4·X⊗X): the middle-transition generator |1̄⟩⟨2̄| + h.c. plus an
/// equal-strength outer generator |0̄⟩⟨3̄| + h.c.
pub fn double_iswap_target() -> GateTarget {
    let mut g = ComplexMatrix::zeros(4, 4).into_dmatrix();
    for (a, b) in [(1, 2), (0, 3)] {
        g[(a, b)] = C64::new(1.0, 0.0);
        g[(b, a)] = C64::new(1.0, 0.0);
    }
    let g = ComplexMatrix::from_dmatrix(g).expect("finite entries");
    GateTarget { name: GateName::DoubleIswap.to_string(), ideal: exp_i(&g, FRAC_PI_4) }
}

pub fn build_gate(name: GateName) -> GateTarget {
    let id2 = ComplexMatrix::identity(2);
    let xx = kron(&pauli_x(), &pauli_x());
    let yy = kron(&pauli_y(), &pauli_y());
    let xy_sum = &xx + &yy;
    let ideal = match name {
        GateName::X90Q1 => kron(&quarter_turn(&pauli_x()), &id2),
        GateName::X90Q2 => kron(&id2, &quarter_turn(&pauli_x())),
        GateName::Y90Q2 => kron(&id2, &quarter_turn(&pauli_y())),
        GateName::Z90Q1 => kron(&quarter_turn(&pauli_z()), &id2),
        GateName::Z90Q2 => kron(&id2, &quarter_turn(&pauli_z())),
        GateName::Iswap => exp_i(&xy_sum, FRAC_PI_4),
        GateName::SqrtIswap => exp_i(&xy_sum, FRAC_PI_4 / 2.0),
        GateName::DoubleIswap => return double_iswap_target(),
        // Bits (MSB first): T1-Q1, T1-Q2, T2-Q1, T2-Q2.
        GateName::Cz => controlled_on_last(0b0100, 0, &pauli_z()),
        GateName::Cx => controlled_on_last(0b0100, 0, &pauli_x()),
        GateName::Cccz => controlled_on_last(0b1110, 0, &pauli_z()),
        GateName::Cccx => controlled_on_last(0b1110, 0, &pauli_x()),
        GateName::Identity => ComplexMatrix::identity(4),
    };
    GateTarget { name: name.to_string(), ideal }
}

/// Gate matrix as CSV with header `row,col,re,im`.
pub fn gate_csv(name: GateName) -> String {
    crate::dynamics::propagator_csv(&build_gate(name).ideal)
}
