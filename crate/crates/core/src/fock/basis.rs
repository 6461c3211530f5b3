use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of modes a basis may carry.
pub const MAX_MODES: usize = 6;

/// Default bound on the total photon number.
pub const DEFAULT_CUTOFF: usize = 3;

/// Occupation numbers of every mode, one entry per mode.
pub type Occupation = Vec<u8>;

/// Multimode Fock basis truncated by total photon number.
///
/// States are ordered by total photon number, ascending; inside one sector
/// the occupation vectors are ordered lexicographically descending, so for
/// two modes the order is `|00>, |10>, |01>, |20>, |11>, |02>, ...`.
#[derive(Clone)]
pub struct FockBasis {
    num_modes: usize,
    cutoff: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl FockBasis {
    pub fn new(num_modes: usize, cutoff: usize) -> Result<Self> {
        if num_modes == 0 {
            return Err(Error::BasisMismatch("a basis needs at least one mode".into()));
        }
        if num_modes > MAX_MODES {
            return Err(Error::TooManyModes(num_modes));
        }
        if cutoff > u8::MAX as usize {
            return Err(Error::BasisMismatch(format!("cutoff {cutoff} too large")));
        }
        let mut states = Vec::new();
        for total in 0..=cutoff {
            let mut current = vec![0u8; num_modes];
            compositions(total, 0, &mut current, &mut states);
        }
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(Self {
            num_modes,
            cutoff,
            states,
            index,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn occupation(&self, index: usize) -> &[u8] {
        &self.states[index]
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn states(&self) -> impl Iterator<Item = &[u8]> {
        self.states.iter().map(|s| s.as_slice())
    }

    pub fn total_photons(&self, index: usize) -> usize {
        self.states[index].iter().map(|&n| n as usize).sum()
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::InvalidMode {
                mode,
                num_modes: self.num_modes,
            });
        }
        Ok(())
    }

    pub(crate) fn same_space(&self, other: &FockBasis) -> bool {
        self.num_modes == other.num_modes && self.cutoff == other.cutoff
    }
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other)
    }
}

impl fmt::Debug for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FockBasis")
            .field("num_modes", &self.num_modes)
            .field("cutoff", &self.cutoff)
            .field("dim", &self.dim())
            .finish()
    }
}

// Fills `out` with every way of placing `remaining` photons into modes
// `mode..`, highest occupation of the earliest mode first.
fn compositions(remaining: usize, mode: usize, current: &mut Occupation, out: &mut Vec<Occupation>) {
    let last = current.len() - 1;
    if mode == last {
        current[mode] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        current[mode] = n as u8;
        compositions(remaining - n, mode + 1, current, out);
    }
    current[mode] = 0;
}

/// Number of occupation vectors with `modes` entries and total at most `cutoff`.
pub fn basis_dimension(modes: usize, cutoff: usize) -> usize {
    // C(cutoff + modes, modes)
    let mut acc: u128 = 1;
    for k in 1..=modes as u128 {
        acc = acc * (cutoff as u128 + k) / k;
    }
    acc as usize
}
