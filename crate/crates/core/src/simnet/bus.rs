use std::collections::BTreeMap;

use serde::Serialize;

use crate::protocol::{Address, Channel, MessageKind, ProtocolMessage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Disposition {
    Delivered,
    Dropped,
    Modified,
    Injected,
}

/// One per-recipient delivery attempt.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimEvent {
    pub step: u64,
    pub message: ProtocolMessage,
    /// The recipient of this copy (broadcasts are logged once per recipient).
    pub to: Address,
    pub disposition: Disposition,
}

#[derive(Serialize)]
struct EventLine<'a> {
    step: u64,
    kind: &'a str,
    sender: String,
    receiver: String,
    disposition: Disposition,
    payload_hex: String,
    epoch: u64,
}

/// Append-only delivery log.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    events: Vec<SimEvent>,
}

impl Transcript {
    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    fn push(&mut self, message: ProtocolMessage, to: Address, disposition: Disposition) {
        let step = self.events.len() as u64;
        self.events.push(SimEvent { step, message, to, disposition });
    }

    /// Messages that reached a recipient.
    pub fn delivered(&self) -> impl Iterator<Item = &SimEvent> {
        self.events.iter().filter(|e| e.disposition != Disposition::Dropped)
    }

    pub fn of_kind(&self, kind: MessageKind) -> impl Iterator<Item = &SimEvent> {
        self.delivered().filter(move |e| e.message.kind == kind)
    }

    /// JSON Lines, one event per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let line = EventLine {
                step: e.step,
                kind: e.message.kind.as_str(),
                sender: e.message.sender.to_string(),
                receiver: e.to.to_string(),
                disposition: e.disposition,
                payload_hex: hex::encode(&e.message.payload),
                epoch: e.message.epoch,
            };
            out.push_str(&serde_json::to_string(&line).expect("plain struct serializes"));
            out.push('\n');
        }
        out
    }
}

/// Sees every message the bus carries and decides what each recipient gets.
pub trait Adversary {
    fn intercept(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<(ProtocolMessage, Disposition)>;
}

/// Delivers everything untouched.
#[derive(Debug, Default)]
pub struct NoAdversary;

impl Adversary for NoAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, _to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        vec![(msg, Disposition::Delivered)]
    }
}

/// In-memory bus: every delivery goes through the adversary and into the transcript.
#[derive(Debug)]
pub struct Bus<A: Adversary> {
    pub adversary: A,
    transcript: Transcript,
    arrivals: BTreeMap<Address, u64>,
}

impl<A: Adversary> Bus<A> {
    pub fn new(adversary: A) -> Self {
        Self { adversary, transcript: Transcript::default(), arrivals: BTreeMap::new() }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    /// Sends a message the adversary authored itself.
    pub fn inject(&mut self, msg: ProtocolMessage, to: &Address) -> ProtocolMessage {
        self.transcript.push(msg.clone(), to.clone(), Disposition::Injected);
        *self.arrivals.entry(to.clone()).or_default() += 1;
        msg
    }

    /// Messages that reached `to` since the last [`Bus::reset_arrivals`].
    pub fn arrivals(&self, to: &Address) -> u64 {
        self.arrivals.get(to).copied().unwrap_or(0)
    }

    pub fn reset_arrivals(&mut self) {
        self.arrivals.clear();
    }
}

impl<A: Adversary> Channel for Bus<A> {
    fn carry(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<ProtocolMessage> {
        let mut out = Vec::new();
        for (m, disposition) in self.adversary.intercept(msg, to) {
            self.transcript.push(m.clone(), to.clone(), disposition);
            if disposition != Disposition::Dropped {
                *self.arrivals.entry(to.clone()).or_default() += 1;
                out.push(m);
            }
        }
        out
    }
}
