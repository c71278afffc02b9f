use std::collections::hash_map::DefaultHasher;
use std::fmt::Write as _;
use std::hash::Hasher;

use crate::linalg::Vector;

/// One exchanged message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageRecord {
    pub step: usize,
    pub round: usize,
    pub sender: usize,
    pub receiver: usize,
    pub kind: &'static str,
    pub digest: u64,
}

/// Log of every message exchanged between local controllers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<MessageRecord>,
}

pub fn digest(payload: &[&Vector]) -> u64 {
    let mut h = DefaultHasher::new();
    for v in payload {
        h.write_usize(v.len());
        for x in v.iter() {
            h.write_u64(x.to_bits());
        }
    }
    h.finish()
}

impl Transcript {
    pub fn push(&mut self, step: usize, round: usize, sender: usize, receiver: usize, kind: &'static str, payload: &[&Vector]) {
        self.records.push(MessageRecord {
            step,
            round,
            sender,
            receiver,
            kind,
            digest: digest(payload),
        });
    }

    /// One line per message: `step round sender receiver kind digest`, 1-based subsystem ids.
    pub fn to_text(&self) -> String {
        let mut s = String::from("step,round,sender,receiver,kind,digest\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:016x}",
                r.step,
                r.round,
                r.sender + 1,
                r.receiver + 1,
                r.kind,
                r.digest
            );
        }
        s
    }
}
