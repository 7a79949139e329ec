use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::bus::{Adversary, Disposition};
use crate::algebra::{CurveParams, CurvePoint, FieldElement};
use crate::cryptoprims::{decrypt, encrypt, kdf};
use crate::ids::MemberId;
use crate::pairing::PairingEngine;
use crate::protocol::message::{open_sealed, sealed_message, Announce};
use crate::protocol::{key_context, stage, Address, MessageKind, ProtocolMessage};
use crate::sss::Share;

fn is_announce_from(msg: &ProtocolMessage, id: &MemberId) -> bool {
    msg.kind == MessageKind::PublicShareAnnounce && msg.sender == Address::Member(id.clone())
}

/// Records announces from `target` and, in race mode, slips a copy to the GM ahead of the
/// genuine one.
#[derive(Debug)]
pub struct ReplayAdversary {
    pub target: MemberId,
    pub race: bool,
    pub captured: Option<ProtocolMessage>,
    raced: bool,
}

impl ReplayAdversary {
    pub fn new(target: MemberId, race: bool) -> Self {
        Self { target, race, captured: None, raced: false }
    }
}

impl Adversary for ReplayAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        if is_announce_from(&msg, &self.target) {
            self.captured.get_or_insert_with(|| msg.clone());
            if self.race && !self.raced && matches!(to, Address::Gm(_)) {
                self.raced = true;
                let copy = self.captured.clone().expect("captured above");
                return vec![(copy, Disposition::Injected), (msg, Disposition::Delivered)];
            }
        }
        vec![(msg, Disposition::Delivered)]
    }
}

/// Marks traffic sent under a stolen identity as adversary-authored.
#[derive(Debug)]
pub struct CompromiseAdversary {
    pub stolen: MemberId,
}

impl Adversary for CompromiseAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, _to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        let disposition = if msg.sender == Address::Member(self.stolen.clone()) {
            Disposition::Injected
        } else {
            Disposition::Delivered
        };
        vec![(msg, disposition)]
    }
}

/// Sits on the link between `left` and `right`. Replaces `left`'s announce towards `right`
/// with `a·P`, which lets it derive `right`'s key for that link as `e(a·B, Q)`.
#[derive(Debug)]
pub struct SubstitutionAdversary {
    pub left: MemberId,
    pub right: MemberId,
    a: FieldElement,
    curve: CurveParams,
    pairing: PairingEngine,
    q: CurvePoint,
    right_point: Option<CurvePoint>,
    left_x: Option<FieldElement>,
    /// `right`'s share, recovered from its EncShare to `left`.
    pub exposed: Option<Share>,
    rng: ChaCha20Rng,
}

impl SubstitutionAdversary {
    pub fn new(left: MemberId, right: MemberId, curve: CurveParams, q: CurvePoint, seed: u64) -> crate::Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let a = curve.scalar_field().element(rng.gen_range(1..curve.order()));
        Ok(Self {
            left,
            right,
            a,
            curve,
            pairing: PairingEngine::new(curve)?,
            q,
            right_point: None,
            left_x: None,
            exposed: None,
            rng,
        })
    }

    fn link_key(&self) -> Option<crate::cryptoprims::SymmetricKey> {
        let b = self.right_point?;
        let z = self.pairing.pair(&b.scalar_mul(self.a.value() as u128), &self.q).ok()?;
        Some(kdf(&z, &key_context(stage::PAIRWISE, self.left.as_str(), self.right.as_str())))
    }
}

impl Adversary for SubstitutionAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        let left = Address::Member(self.left.clone());
        let right = Address::Member(self.right.clone());
        if is_announce_from(&msg, &self.right) {
            if let Ok(a) = Announce::decode(&msg, &self.curve) {
                self.right_point = Some(a.point);
            }
        }
        if is_announce_from(&msg, &self.left) && *to == right {
            if let Ok(genuine) = Announce::decode(&msg, &self.curve) {
                self.left_x = Some(genuine.x);
                let fake = Announce { point: self.curve.mul_generator(&self.a), ..genuine };
                return vec![(fake.into_message(msg.epoch), Disposition::Modified)];
            }
        }
        if msg.kind == MessageKind::EncShare && msg.sender == right && *to == left {
            if let (Some(key), Ok(ct)) = (self.link_key(), open_sealed(&msg, MessageKind::EncShare)) {
                if let Ok(plain) = decrypt(&key, &ct) {
                    self.exposed = crate::protocol::decode_share(&self.curve, &plain).ok();
                }
            }
        }
        if msg.kind == MessageKind::EncShare && msg.sender == left && *to == right {
            if let (Some(key), Some(x)) = (self.link_key(), self.left_x) {
                let fr = self.curve.scalar_field();
                let fake = Share { x, y: fr.element(self.rng.gen_range(0..fr.modulus())) };
                let ct = encrypt(&key, &crate::protocol::encode_share(&fake), &mut self.rng);
                let forged = sealed_message(MessageKind::EncShare, left, right, msg.epoch, &ct);
                return vec![(forged, Disposition::Modified)];
            }
        }
        vec![(msg, Disposition::Delivered)]
    }
}

/// Outsider that injects one invalid announce under a fresh identity whenever `trigger`'s
/// announce reaches `confirmer`.
#[derive(Debug)]
pub struct CorruptShareAdversary {
    pub trigger: MemberId,
    pub confirmer: Address,
    pub forged: Announce,
    pub injections: u64,
}

impl Adversary for CorruptShareAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        if is_announce_from(&msg, &self.trigger) && *to == self.confirmer {
            self.injections += 1;
            let bogus = self.forged.clone().into_message(msg.epoch);
            return vec![(msg, Disposition::Delivered), (bogus, Disposition::Injected)];
        }
        vec![(msg, Disposition::Delivered)]
    }
}

/// Colluding insiders: each announce reaches `confirmer` `copies` times.
#[derive(Debug)]
pub struct FloodAdversary {
    pub confirmer: Address,
    pub copies: u64,
}

impl Adversary for FloodAdversary {
    fn intercept(&mut self, msg: ProtocolMessage, to: &Address) -> Vec<(ProtocolMessage, Disposition)> {
        let mut out = vec![(msg.clone(), Disposition::Delivered)];
        if msg.kind == MessageKind::PublicShareAnnounce && *to == self.confirmer {
            for _ in 1..self.copies {
                out.push((msg.clone(), Disposition::Injected));
            }
        }
        out
    }
}
