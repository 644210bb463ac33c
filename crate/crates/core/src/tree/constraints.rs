use std::collections::BTreeSet;
use std::fmt;

use crate::instance::{JobId, MachineId};

/// Arc "`pred` immediately before `succ` on `machine`". `pred = 0` is the
/// start of the schedule. Ordered lexicographically by `(machine, pred, succ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub machine: MachineId,
    pub pred: JobId,
    pub succ: JobId,
}

impl Edge {
    pub fn new(machine: MachineId, pred: JobId, succ: JobId) -> Self {
        Edge { machine, pred, succ }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {} -> {})", self.machine, self.pred, self.succ)
    }
}

/// Branching decisions accumulated along a path of the search tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct NodeConstraints {
    forced: BTreeSet<Edge>,
    forbidden: BTreeSet<Edge>,
}

impl NodeConstraints {
    pub fn forced(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.forced.iter()
    }

    pub fn forbidden(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.forbidden.iter()
    }

    pub fn is_constrained(&self, edge: &Edge) -> bool {
        self.forced.contains(edge) || self.forbidden.contains(edge)
    }

    pub fn with_forced(mut self, edge: Edge) -> Self {
        self.forced.insert(edge);
        self
    }

    pub fn with_forbidden(mut self, edge: Edge) -> Self {
        self.forbidden.insert(edge);
        self
    }

    pub fn len(&self) -> usize {
        self.forced.len() + self.forbidden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
