//! Exhaustive linearizability check for small histories on a single key.
//!
//! The model is a set restricted to one key, i.e. a boolean. An operation is
//! linearizable if some total order that respects real time (a response
//! before an invocation) replays every recorded result against the model.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyOp {
    Insert,
    Erase,
    Contains,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub op: KeyOp,
    /// Insert: newly inserted. Erase: removed. Contains: present.
    pub result: bool,
    pub invoked: u64,
    pub returned: u64,
}

fn apply(present: bool, op: KeyOp) -> (bool, bool) {
    match op {
        KeyOp::Insert => (true, !present),
        KeyOp::Erase => (false, present),
        KeyOp::Contains => (present, present),
    }
}

/// A witness order (indices into `history`), if one exists.
pub fn linearize(history: &[Event], initially_present: bool) -> Option<Vec<usize>> {
    let mut done = vec![false; history.len()];
    let mut order = Vec::with_capacity(history.len());
    search(history, initially_present, &mut done, &mut order).then_some(order)
}

fn search(h: &[Event], present: bool, done: &mut [bool], order: &mut Vec<usize>) -> bool {
    if order.len() == h.len() {
        return true;
    }
    for i in 0..h.len() {
        if done[i] {
            continue;
        }
        // `i` may go next only if no pending event finished before it began.
        let minimal = (0..h.len()).all(|j| done[j] || j == i || h[j].returned > h[i].invoked);
        if !minimal {
            continue;
        }
        let (next, expected) = apply(present, h[i].op);
        if expected != h[i].result {
            continue;
        }
        done[i] = true;
        order.push(i);
        if search(h, next, done, order) {
            return true;
        }
        order.pop();
        done[i] = false;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(op: KeyOp, result: bool, invoked: u64, returned: u64) -> Event {
        Event {
            op,
            result,
            invoked,
            returned,
        }
    }

    #[test]
    fn sequential_history() {
        let h = [
            ev(KeyOp::Insert, true, 0, 1),
            ev(KeyOp::Contains, true, 2, 3),
            ev(KeyOp::Erase, true, 4, 5),
        ];
        assert_eq!(linearize(&h, false), Some(vec![0, 1, 2]));
        assert_eq!(linearize(&h, true), None);
    }

    #[test]
    fn overlap_allows_reordering() {
        // contains overlaps the insert, so either answer is fine.
        let h = [ev(KeyOp::Insert, true, 0, 3), ev(KeyOp::Contains, false, 1, 2)];
        assert!(linearize(&h, false).is_some());
        let h = [ev(KeyOp::Insert, true, 0, 3), ev(KeyOp::Contains, true, 1, 2)];
        assert!(linearize(&h, false).is_some());
    }

    #[test]
    fn real_time_order_is_enforced() {
        // contains returned before the insert began, yet claims presence.
        let h = [ev(KeyOp::Contains, true, 0, 1), ev(KeyOp::Insert, true, 2, 3)];
        assert!(linearize(&h, false).is_none());
        // Two successful inserts with no erase in between.
        let h = [ev(KeyOp::Insert, true, 0, 5), ev(KeyOp::Insert, true, 1, 4)];
        assert!(linearize(&h, false).is_none());
    }
}
