use rand::Rng;

use super::circuit::Gate;
use super::dense::StateVector;
use crate::error::{Result, SimError};
use crate::pauli::{BitString, PauliString};

#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    /// Global qubit held at each local position.
    pub qubits: Vec<usize>,
    pub state: StateVector,
}

/// Tensor product of independent dense registers.
///
/// Registers merge when a gate spans more than one of them and are never
/// split again.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredState {
    n: usize,
    registers: Vec<Register>,
    // qubit -> (register index, local position)
    owner: Vec<(usize, usize)>,
    cap: usize,
}

impl FactoredState {
    /// `|0^n⟩` split into consecutive registers of `block` qubits.
    pub fn zero(n: usize, block: usize, cap: usize) -> Result<FactoredState> {
        if block == 0 {
            return Err(SimError::Argument("register block size must be >= 1".into()));
        }
        if block.min(n) > cap {
            return Err(SimError::capacity("dense register qubits", cap, block));
        }
        let registers = (0..n)
            .step_by(block)
            .map(|start| {
                let qubits: Vec<usize> = (start..(start + block).min(n)).collect();
                Register {
                    state: StateVector::zero(qubits.len()),
                    qubits,
                }
            })
            .collect();
        let mut s = FactoredState {
            n,
            registers,
            owner: Vec::new(),
            cap,
        };
        s.rebuild_owner();
        Ok(s)
    }

    fn rebuild_owner(&mut self) {
        self.owner = vec![(0, 0); self.n];
        for (r, reg) in self.registers.iter().enumerate() {
            for (local, &q) in reg.qubits.iter().enumerate() {
                self.owner[q] = (r, local);
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    /// Merge every register touching `qubits` into one; returns its index.
    fn merge_for(&mut self, qubits: &[usize]) -> Result<usize> {
        let mut regs: Vec<usize> = qubits.iter().map(|&q| self.owner[q].0).collect();
        regs.sort_unstable();
        regs.dedup();
        if regs.len() == 1 {
            return Ok(regs[0]);
        }
        let size: usize = regs.iter().map(|&r| self.registers[r].qubits.len()).sum();
        if size > self.cap {
            return Err(SimError::capacity("dense register qubits", self.cap, size));
        }
        let mut merged = self.registers[regs[0]].clone();
        for &r in &regs[1..] {
            let other = &self.registers[r];
            merged.state = merged.state.kron(&other.state);
            merged.qubits.extend_from_slice(&other.qubits);
        }
        let keep = regs[0];
        self.registers[keep] = merged;
        for &r in regs[1..].iter().rev() {
            self.registers.remove(r);
        }
        self.rebuild_owner();
        Ok(keep)
    }

    /// Number of registers `gate` touches.
    pub fn registers_spanned(&self, gate: &Gate) -> usize {
        let mut regs: Vec<usize> = gate.qubits().iter().map(|&q| self.owner[q].0).collect();
        regs.sort_unstable();
        regs.dedup();
        regs.len()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        let r = self.merge_for(&gate.qubits())?;
        let owner = &self.owner;
        let local = gate.remap(|q| owner[q].1);
        self.registers[r].state.apply_gate(&local);
        Ok(())
    }

    fn check(&self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(SimError::dim(self.n, p.n()));
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check(p)?;
        for reg in &mut self.registers {
            let local = p.restrict(&reg.qubits);
            if !local.is_identity() {
                reg.state.apply_pauli(&local)?;
            }
        }
        Ok(())
    }

    /// Product of per-register expectations (the state is a product state).
    pub fn expectation_pauli(&self, p: &PauliString) -> Result<f64> {
        self.check(p)?;
        let mut e = 1.0;
        for reg in &self.registers {
            let local = p.restrict(&reg.qubits);
            if !local.is_identity() {
                e *= reg.state.expectation_pauli(&local)?;
            }
        }
        Ok(e)
    }

    /// Samples each register's factor of `p` independently. The product of
    /// the factors has the Born distribution of `p`; the post-measurement
    /// state is that of the finer per-register measurement.
    pub fn sample_pauli_eigenvalue<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        rng: &mut R,
    ) -> Result<i8> {
        self.check(p)?;
        if p.is_identity() {
            return Err(SimError::Argument(
                "identity observable has the deterministic value +1".into(),
            ));
        }
        let mut outcome = 1i8;
        for reg in &mut self.registers {
            let local = p.restrict(&reg.qubits);
            if !local.is_identity() {
                outcome *= reg.state.sample_pauli_eigenvalue(&local, rng)?;
            }
        }
        Ok(outcome)
    }

    pub fn sample_bitstring<R: Rng + ?Sized>(&mut self, rng: &mut R) -> BitString {
        let mut bits = BitString::zeros(self.n);
        for reg in &mut self.registers {
            let local = reg.state.sample_bitstring(rng);
            for (j, &q) in reg.qubits.iter().enumerate() {
                bits.0[q] = local.0[j];
            }
        }
        bits
    }

    /// Full statevector in global qubit order.
    pub fn to_dense(&self) -> Result<StateVector> {
        if self.n > self.cap {
            return Err(SimError::capacity("dense qubits", self.cap, self.n));
        }
        let mut acc = StateVector::zero(0);
        let mut order: Vec<usize> = Vec::new();
        for reg in &self.registers {
            acc = acc.kron(&reg.state);
            order.extend_from_slice(&reg.qubits);
        }
        // acc's local position i holds global qubit order[i]; permute.
        let src = acc.amplitudes();
        let mut amps = vec![num_complex::Complex64::new(0.0, 0.0); src.len()];
        for (i, a) in src.iter().enumerate() {
            let g: usize = order
                .iter()
                .enumerate()
                .map(|(local, &q)| ((i >> local) & 1) << q)
                .sum();
            amps[g] = *a;
        }
        StateVector::from_amplitudes(amps)
    }
}
