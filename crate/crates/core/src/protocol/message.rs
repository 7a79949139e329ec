use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{CurveParams, CurvePoint, FieldElement};
use crate::cryptoprims::Ciphertext;
use crate::error::{Error, Result};
use crate::ids::{GroupId, MemberId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MessageKind {
    PublicShareAnnounce,
    ConfirmResult,
    EncShare,
    HandoverRequestGm,
    HandoverGrant,
    HandoverRequestPeer,
    HandoverPeerGrant,
    CredentialUpdate,
}

impl MessageKind {
    pub const ALL: [MessageKind; 8] = [
        MessageKind::PublicShareAnnounce,
        MessageKind::ConfirmResult,
        MessageKind::EncShare,
        MessageKind::HandoverRequestGm,
        MessageKind::HandoverGrant,
        MessageKind::HandoverRequestPeer,
        MessageKind::HandoverPeerGrant,
        MessageKind::CredentialUpdate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::PublicShareAnnounce => "PublicShareAnnounce",
            MessageKind::ConfirmResult => "ConfirmResult",
            MessageKind::EncShare => "EncShare",
            MessageKind::HandoverRequestGm => "HandoverRequestGm",
            MessageKind::HandoverGrant => "HandoverGrant",
            MessageKind::HandoverRequestPeer => "HandoverRequestPeer",
            MessageKind::HandoverPeerGrant => "HandoverPeerGrant",
            MessageKind::CredentialUpdate => "CredentialUpdate",
        }
    }

    /// Positions of ciphertext fields in this kind's payload.
    fn ciphertext_fields(self) -> &'static [usize] {
        match self {
            MessageKind::EncShare | MessageKind::HandoverGrant => &[0],
            MessageKind::HandoverPeerGrant => &[3],
            MessageKind::CredentialUpdate => &[2],
            _ => &[],
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MessageKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::UnknownMessageKind(s.to_string()))
    }
}

/// Endpoint of a message.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Address {
    Member(MemberId),
    Gm(GroupId),
    Broadcast,
    Adversary,
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Address::Member(id) => write!(f, "{id}"),
            Address::Gm(g) => write!(f, "gm-{g}"),
            Address::Broadcast => f.write_str("*"),
            Address::Adversary => f.write_str("adversary"),
        }
    }
}

impl FromStr for Address {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "*" {
            return Ok(Address::Broadcast);
        }
        if s == "adversary" {
            return Ok(Address::Adversary);
        }
        if let Some(n) = s.strip_prefix("gm-") {
            if let Ok(g) = n.parse() {
                return Ok(Address::Gm(GroupId(g)));
            }
        }
        Ok(Address::Member(MemberId::new(s)?))
    }
}

/// One message on the bus. The payload is the exact wire bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub kind: MessageKind,
    pub sender: Address,
    pub receiver: Address,
    pub epoch: u64,
    pub payload: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct WireMessage {
    kind: String,
    sender: String,
    receiver: String,
    payload_hex: String,
    epoch: u64,
}

impl ProtocolMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&WireMessage {
            kind: self.kind.to_string(),
            sender: self.sender.to_string(),
            receiver: self.receiver.to_string(),
            payload_hex: hex::encode(&self.payload),
            epoch: self.epoch,
        })
        .expect("plain struct serializes")
    }

    /// Parses the JSON form, rejecting unknown kinds and bad hex.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: WireMessage =
            serde_json::from_str(text).map_err(|e| Error::MalformedPayload(e.to_string()))?;
        Ok(Self {
            kind: wire.kind.parse()?,
            sender: wire.sender.parse()?,
            receiver: wire.receiver.parse()?,
            epoch: wire.epoch,
            payload: hex::decode(&wire.payload_hex)
                .map_err(|e| Error::MalformedPayload(e.to_string()))?,
        })
    }

    fn expect_kind(&self, kind: MessageKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::MalformedPayload(format!("expected {kind}, got {}", self.kind)));
        }
        Ok(())
    }

    /// Payload fields that travel unencrypted.
    pub fn cleartext_fields(&self) -> Result<Vec<Vec<u8>>> {
        let fields = split_fields(&self.payload)?;
        let skip = self.kind.ciphertext_fields();
        Ok(fields
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, f)| f.to_vec())
            .collect())
    }

    pub fn sender_member(&self) -> Result<&MemberId> {
        match &self.sender {
            Address::Member(id) => Ok(id),
            other => Err(Error::MalformedPayload(format!("sender {other} is not a member"))),
        }
    }
}

// Every payload is a sequence of u16-length-prefixed fields.

#[derive(Default)]
struct FieldWriter(Vec<u8>);

impl FieldWriter {
    fn field(mut self, bytes: &[u8]) -> Self {
        let len = u16::try_from(bytes.len()).expect("payload field fits u16");
        self.0.extend_from_slice(&len.to_be_bytes());
        self.0.extend_from_slice(bytes);
        self
    }
}

fn split_fields(payload: &[u8]) -> Result<Vec<&[u8]>> {
    let mut out = Vec::new();
    let mut rest = payload;
    while !rest.is_empty() {
        if rest.len() < 2 {
            return Err(Error::MalformedPayload("truncated field length".into()));
        }
        let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        if rest.len() < 2 + len {
            return Err(Error::MalformedPayload("truncated field".into()));
        }
        out.push(&rest[2..2 + len]);
        rest = &rest[2 + len..];
    }
    Ok(out)
}

fn fields_exact(payload: &[u8], n: usize) -> Result<Vec<&[u8]>> {
    let fields = split_fields(payload)?;
    if fields.len() != n {
        return Err(Error::MalformedPayload(format!("expected {n} fields, got {}", fields.len())));
    }
    Ok(fields)
}

fn u32_field(bytes: &[u8]) -> Result<u32> {
    Ok(u32::from_be_bytes(
        bytes.try_into().map_err(|_| Error::MalformedPayload("expected 4-byte integer".into()))?,
    ))
}

fn u64_field(bytes: &[u8]) -> Result<u64> {
    Ok(u64::from_be_bytes(
        bytes.try_into().map_err(|_| Error::MalformedPayload("expected 8-byte integer".into()))?,
    ))
}

fn id_field(bytes: &[u8]) -> Result<MemberId> {
    let s = std::str::from_utf8(bytes).map_err(|_| Error::MalformedPayload("id not ASCII".into()))?;
    MemberId::new(s)
}

/// `x ‖ f(x)·P ‖ ID`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Announce {
    pub x: FieldElement,
    pub point: CurvePoint,
    pub id: MemberId,
}

impl Announce {
    pub fn into_message(self, epoch: u64) -> ProtocolMessage {
        let payload = FieldWriter::default()
            .field(&self.x.to_bytes())
            .field(&self.point.encode())
            .field(self.id.as_str().as_bytes())
            .0;
        ProtocolMessage {
            kind: MessageKind::PublicShareAnnounce,
            sender: Address::Member(self.id),
            receiver: Address::Broadcast,
            epoch,
            payload,
        }
    }

    pub fn decode(msg: &ProtocolMessage, curve: &CurveParams) -> Result<Self> {
        msg.expect_kind(MessageKind::PublicShareAnnounce)?;
        let f = fields_exact(&msg.payload, 3)?;
        Ok(Self {
            x: curve.scalar_field().decode(f[0])?,
            point: curve.decode_point(f[1])?,
            id: id_field(f[2])?,
        })
    }
}

/// Hand-over request, addressed either to the host GM or to a host member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HandoverRequest {
    pub x: FieldElement,
    pub point: CurvePoint,
    pub home: GroupId,
    pub target: GroupId,
}

impl HandoverRequest {
    pub fn into_message(
        self,
        kind: MessageKind,
        sender: Address,
        receiver: Address,
        epoch: u64,
    ) -> ProtocolMessage {
        debug_assert!(matches!(
            kind,
            MessageKind::HandoverRequestGm | MessageKind::HandoverRequestPeer
        ));
        let payload = FieldWriter::default()
            .field(&self.x.to_bytes())
            .field(&self.point.encode())
            .field(&self.home.0.to_be_bytes())
            .field(&self.target.0.to_be_bytes())
            .0;
        ProtocolMessage { kind, sender, receiver, epoch, payload }
    }

    pub fn decode(msg: &ProtocolMessage, curve: &CurveParams) -> Result<Self> {
        if !matches!(msg.kind, MessageKind::HandoverRequestGm | MessageKind::HandoverRequestPeer) {
            return Err(Error::MalformedPayload(format!("{} is not a hand-over request", msg.kind)));
        }
        let f = fields_exact(&msg.payload, 4)?;
        Ok(Self {
            x: curve.scalar_field().decode(f[0])?,
            point: curve.decode_point(f[1])?,
            home: GroupId(u32_field(f[2])?),
            target: GroupId(u32_field(f[3])?),
        })
    }
}

/// Payload carrying a single ciphertext (EncShare, HandoverGrant).
pub fn sealed_message(
    kind: MessageKind,
    sender: Address,
    receiver: Address,
    epoch: u64,
    ciphertext: &Ciphertext,
) -> ProtocolMessage {
    debug_assert!(matches!(kind, MessageKind::EncShare | MessageKind::HandoverGrant));
    let payload = FieldWriter::default().field(&ciphertext.to_bytes()).0;
    ProtocolMessage { kind, sender, receiver, epoch, payload }
}

pub fn open_sealed(msg: &ProtocolMessage, kind: MessageKind) -> Result<Ciphertext> {
    msg.expect_kind(kind)?;
    let f = fields_exact(&msg.payload, 1)?;
    Ciphertext::from_bytes(f[0])
}

/// Host member's reply in the peer-led hand-over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeerGrant {
    pub x: FieldElement,
    pub point: CurvePoint,
    pub id: MemberId,
    pub ciphertext: Ciphertext,
}

impl PeerGrant {
    pub fn into_message(self, receiver: Address, epoch: u64) -> ProtocolMessage {
        let payload = FieldWriter::default()
            .field(&self.x.to_bytes())
            .field(&self.point.encode())
            .field(self.id.as_str().as_bytes())
            .field(&self.ciphertext.to_bytes())
            .0;
        ProtocolMessage {
            kind: MessageKind::HandoverPeerGrant,
            sender: Address::Member(self.id),
            receiver,
            epoch,
            payload,
        }
    }

    pub fn decode(msg: &ProtocolMessage, curve: &CurveParams) -> Result<Self> {
        msg.expect_kind(MessageKind::HandoverPeerGrant)?;
        let f = fields_exact(&msg.payload, 4)?;
        Ok(Self {
            x: curve.scalar_field().decode(f[0])?,
            point: curve.decode_point(f[1])?,
            id: id_field(f[2])?,
            ciphertext: Ciphertext::from_bytes(f[3])?,
        })
    }
}

/// Encrypted `x ‖ y` for `group` at `epoch`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CredentialUpdate {
    pub group: GroupId,
    pub epoch: u64,
    pub ciphertext: Ciphertext,
}

impl CredentialUpdate {
    pub fn into_message(self, sender: Address, receiver: Address, epoch: u64) -> ProtocolMessage {
        let payload = FieldWriter::default()
            .field(&self.group.0.to_be_bytes())
            .field(&self.epoch.to_be_bytes())
            .field(&self.ciphertext.to_bytes())
            .0;
        ProtocolMessage { kind: MessageKind::CredentialUpdate, sender, receiver, epoch, payload }
    }

    pub fn decode(msg: &ProtocolMessage) -> Result<Self> {
        msg.expect_kind(MessageKind::CredentialUpdate)?;
        let f = fields_exact(&msg.payload, 3)?;
        Ok(Self {
            group: GroupId(u32_field(f[0])?),
            epoch: u64_field(f[1])?,
            ciphertext: Ciphertext::from_bytes(f[2])?,
        })
    }
}

/// Outcome for one announce at the confirmation point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Valid,
    Forged,
    UnknownMember,
    Stale,
    Duplicate,
    Malformed,
    /// Aggregate check failed; no single announce can be blamed.
    Unattributed,
}

impl Verdict {
    fn code(self) -> u8 {
        match self {
            Verdict::Valid => 0,
            Verdict::Forged => 1,
            Verdict::UnknownMember => 2,
            Verdict::Stale => 3,
            Verdict::Duplicate => 4,
            Verdict::Malformed => 5,
            Verdict::Unattributed => 6,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Verdict::Valid,
            1 => Verdict::Forged,
            2 => Verdict::UnknownMember,
            3 => Verdict::Stale,
            4 => Verdict::Duplicate,
            5 => Verdict::Malformed,
            6 => Verdict::Unattributed,
            other => return Err(Error::MalformedPayload(format!("verdict code {other}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfirmResult {
    pub accepted: bool,
    pub verdicts: Vec<(MemberId, Verdict)>,
}

impl ConfirmResult {
    pub fn forgers(&self) -> Vec<&MemberId> {
        self.verdicts.iter().filter(|(_, v)| *v == Verdict::Forged).map(|(id, _)| id).collect()
    }

    pub fn verdict_of(&self, id: &MemberId) -> Option<Verdict> {
        self.verdicts.iter().find(|(m, _)| m == id).map(|(_, v)| *v)
    }

    /// `accepted ‖ (id ‖ verdict)*`.
    pub fn into_message(&self, sender: Address, epoch: u64) -> ProtocolMessage {
        let mut w = FieldWriter::default().field(&[u8::from(self.accepted)]);
        for (id, verdict) in &self.verdicts {
            w = w.field(id.as_str().as_bytes()).field(&[verdict.code()]);
        }
        ProtocolMessage {
            kind: MessageKind::ConfirmResult,
            sender,
            receiver: Address::Broadcast,
            epoch,
            payload: w.0,
        }
    }

    pub fn decode(msg: &ProtocolMessage) -> Result<Self> {
        msg.expect_kind(MessageKind::ConfirmResult)?;
        let f = split_fields(&msg.payload)?;
        let (first, rest) = f.split_first().ok_or(Error::MalformedPayload("empty".into()))?;
        if first.len() != 1 || rest.len() % 2 != 0 {
            return Err(Error::MalformedPayload("bad confirm result".into()));
        }
        let verdicts = rest
            .chunks(2)
            .map(|pair| {
                let code = pair[1].first().copied().ok_or(Error::MalformedPayload("verdict".into()))?;
                Ok((id_field(pair[0])?, Verdict::from_code(code)?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { accepted: first[0] == 1, verdicts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Profile;
    use proptest::prelude::*;

    fn curve() -> CurveParams {
        CurveParams::from_profile(Profile::Demo)
    }

    #[test]
    fn unknown_kind_rejected() {
        let msg = Announce {
            x: curve().scalar_field().element(5),
            point: curve().generator(),
            id: MemberId::new("g1-u1").unwrap(),
        }
        .into_message(0);
        let json = msg.to_json();
        assert_eq!(ProtocolMessage::from_json(&json).unwrap(), msg);
        let bogus = json.replace("PublicShareAnnounce", "Teleport");
        assert_eq!(
            ProtocolMessage::from_json(&bogus),
            Err(Error::UnknownMessageKind("Teleport".into()))
        );
    }

    #[test]
    fn addresses_round_trip() {
        for s in ["*", "adversary", "gm-3", "g1-u2"] {
            assert_eq!(s.parse::<Address>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn cleartext_excludes_ciphertext() {
        let c = Ciphertext { nonce: [7; 16], body: vec![9; 4], tag: [8; 16] };
        let msg = CredentialUpdate { group: GroupId(1), epoch: 2, ciphertext: c.clone() }
            .into_message(Address::Gm(GroupId(1)), Address::Broadcast, 1);
        let clear = msg.cleartext_fields().unwrap();
        assert_eq!(clear.len(), 2);
        assert!(clear.iter().all(|f| f != &c.to_bytes()));
        assert_eq!(CredentialUpdate::decode(&msg).unwrap().ciphertext, c);
    }

    #[test]
    fn confirm_result_round_trip() {
        let r = ConfirmResult {
            accepted: false,
            verdicts: vec![
                (MemberId::new("a").unwrap(), Verdict::Valid),
                (MemberId::new("b").unwrap(), Verdict::Forged),
            ],
        };
        let msg = r.into_message(Address::Gm(GroupId(1)), 0);
        assert_eq!(ConfirmResult::decode(&msg).unwrap(), r);
        assert_eq!(r.forgers(), vec![&MemberId::new("b").unwrap()]);
    }

    #[test]
    fn wrong_kind_and_truncation() {
        let c = curve();
        let msg = Announce { x: c.scalar_field().element(1), point: c.generator(), id: MemberId::new("u").unwrap() }
            .into_message(0);
        assert!(CredentialUpdate::decode(&msg).is_err());
        let mut cut = msg.clone();
        cut.payload.pop();
        assert!(Announce::decode(&cut, &c).is_err());
    }

    proptest! {
        #[test]
        fn announce_decode_inverts_encode(x in 1u64..536_870_717, k in 1u64..536_870_717) {
            let c = curve();
            let a = Announce {
                x: c.scalar_field().element(x),
                point: c.generator().scalar_mul(k as u128),
                id: MemberId::new(format!("m{k}")).unwrap(),
            };
            let msg = a.clone().into_message(3);
            let back = ProtocolMessage::from_json(&msg.to_json()).unwrap();
            prop_assert_eq!(Announce::decode(&back, &c).unwrap(), a);
        }
    }
}
