use super::{Circuit, Gate, PauliString};
use crate::error::{Error, Result};

/// Gates taking `p` to `±Z` on qubit 0.
fn reduce_to_z0(p: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    let support = p.support();
    for &q in &support {
        match (p.x_bit(q), p.z_bit(q)) {
            (true, true) => {
                gates.push(Gate::S(q));
                gates.push(Gate::H(q));
            }
            (true, false) => gates.push(Gate::H(q)),
            _ => {}
        }
    }
    let pivot = support[0];
    for &q in &support[1..] {
        gates.push(Gate::Cnot(q, pivot));
    }
    if pivot != 0 {
        gates.push(Gate::Swap(pivot, 0));
    }
    gates
}

/// Clifford circuit `U` with `U p U† = +q`, using `O(n)` gates.
pub fn synthesize_clifford_map(p: &PauliString, q: &PauliString) -> Result<Circuit> {
    let n = p.num_qubits();
    if q.num_qubits() != n {
        return Err(Error::Dimension(format!(
            "Pauli strings on {n} and {} qubits",
            q.num_qubits()
        )));
    }
    if p.is_identity() || q.is_identity() {
        return Err(Error::Domain(
            "the identity cannot be mapped to a traceless Pauli string".into(),
        ));
    }
    if p == q {
        return Ok(Circuit::identity(n));
    }
    let vp = Circuit::from_gates(n, reduce_to_z0(p))?;
    let vq = Circuit::from_gates(n, reduce_to_z0(q))?;
    let mut u = vp.then(&vq.inverse());
    let (negative, image) = u.conjugate(p);
    debug_assert_eq!(&image, q);
    if negative {
        let j = q.support()[0];
        let fix = if q.z_bit(j) { Gate::X(j) } else { Gate::Z(j) };
        u = u.then(&Circuit::from_gates(n, vec![fix])?);
    }
    Ok(u)
}
