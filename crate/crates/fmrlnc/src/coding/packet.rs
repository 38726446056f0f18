//! Coded packets: a coefficient vector over the k messages plus the payload
//! it encodes.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldMatrix, FieldSpec, FieldVector};

/// A coded packet `(mu, payload)`: `payload` is the linear combination of the
/// k original messages selected by the coefficient vector `mu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub mu: FieldVector,
    pub payload: FieldVector,
}

impl Packet {
    pub fn new(mu: FieldVector, payload: FieldVector) -> Packet {
        Packet { mu, payload }
    }

    /// The all-zero packet for dimensions (k, l).
    pub fn zero(k: usize, l: usize) -> Packet {
        Packet { mu: FieldVector::zeros(k), payload: FieldVector::zeros(l) }
    }

    pub fn coeff_len(&self) -> usize {
        self.mu.len()
    }

    pub fn payload_len(&self) -> usize {
        self.payload.len()
    }

    pub fn is_zero(&self) -> bool {
        self.mu.is_zero() && self.payload.is_zero()
    }

    /// self += alpha * other, on both the coefficient vector and the payload.
    pub fn axpy(&mut self, alpha: FieldElement, other: &Packet, spec: &FieldSpec) -> Result<()> {
        self.mu.axpy(alpha, &other.mu, spec)?;
        self.payload.axpy(alpha, &other.payload, spec)
    }

    /// Conservation: the payload equals `mu * M` for the message matrix `M`
    /// held by the harness. Holds for every packet a correct protocol ever
    /// creates, so the harness checks it on all traffic in test mode.
    pub fn satisfies_conservation(&self, messages: &FieldMatrix, spec: &FieldSpec) -> Result<bool> {
        let expect = messages.left_mul_vec(&self.mu, spec)?;
        Ok(expect == self.payload)
    }
}

/// Source packet for message `index` (0-based): the unit coefficient vector
/// paired with the message itself.
pub fn make_source_packet(index: usize, message: &FieldVector, k: usize) -> Result<Packet> {
    if index >= k {
        return Err(Error::validation(format!(
            "message index {index} out of range for k={k}"
        )));
    }
    Ok(Packet { mu: FieldVector::unit(k, index), payload: message.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_packet_is_unit_vector() {
        let msg = FieldVector::from_raw(&[5, 9]);
        let p = make_source_packet(0, &msg, 3).unwrap();
        assert_eq!(p.mu, FieldVector::from_raw(&[1, 0, 0]));
        // payload returned identical to the input message
        assert_eq!(p.payload, msg);
        assert!(make_source_packet(3, &msg, 3).is_err());
    }

    #[test]
    fn source_packet_conserves() {
        // e_i * M selects row i, so conservation holds whenever row i = m_i
        let spec = FieldSpec::for_order(7).unwrap();
        let m = FieldMatrix::from_raw(&[&[1, 2], &[3, 4], &[5, 6]]);
        for i in 0..3 {
            let p = make_source_packet(i, m.row(i), 3).unwrap();
            assert!(p.satisfies_conservation(&m, &spec).unwrap());
        }
    }

    #[test]
    fn axpy_preserves_conservation() {
        let spec = FieldSpec::for_order(16).unwrap();
        let m = FieldMatrix::from_raw(&[&[1, 2, 3], &[4, 5, 6]]);
        let mut p = make_source_packet(0, m.row(0), 2).unwrap();
        let q = make_source_packet(1, m.row(1), 2).unwrap();
        p.axpy(FieldElement(9), &q, &spec).unwrap();
        assert!(p.satisfies_conservation(&m, &spec).unwrap());
    }
}
