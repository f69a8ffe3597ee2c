use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StubbornGroup {
    B1,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StubbornAnchor {
    pub group: StubbornGroup,
    pub value: f64,
}

/// A member of an agent's neighbour pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Participant {
    Mobile(usize),
    Stubborn(usize),
}

/// System state at step `t`: mobile opinions plus fixed stubborn anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionState {
    pub t: u64,
    pub mobile: Vec<f64>,
    pub stubborn: Vec<StubbornAnchor>,
}

impl OpinionState {
    pub fn n(&self) -> usize {
        self.mobile.len()
    }

    pub fn value(&self, p: Participant) -> f64 {
        match p {
            Participant::Mobile(i) => self.mobile[i],
            Participant::Stubborn(k) => self.stubborn[k].value,
        }
    }

    /// Every participant, mobile agents first, each list in index order.
    pub fn participants(&self) -> impl Iterator<Item = (Participant, f64)> + '_ {
        let mobile = self
            .mobile
            .iter()
            .enumerate()
            .map(|(i, &x)| (Participant::Mobile(i), x));
        let stubborn = self
            .stubborn
            .iter()
            .enumerate()
            .map(|(k, a)| (Participant::Stubborn(k), a.value));
        mobile.chain(stubborn)
    }
}

/// States `x(0), ..., x(horizon)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<OpinionState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn horizon(&self) -> u64 {
        self.states.last().map_or(0, |s| s.t)
    }

    pub fn initial(&self) -> &OpinionState {
        &self.states[0]
    }

    pub fn last(&self) -> &OpinionState {
        self.states.last().expect("trajectory holds at least x(0)")
    }

    /// First step `t` with `x(t + 1) == x(t)` bit for bit.
    pub fn fixed_point_step(&self) -> Option<u64> {
        self.states
            .windows(2)
            .find(|w| w[0].mobile == w[1].mobile)
            .map(|w| w[0].t)
    }
}
