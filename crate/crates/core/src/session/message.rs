//! Wire framing.
//!
//! ```text
//! [tag: 1][payload length in bits: 4, BE][sub-block id: 2, BE, 0xFFFF = none][payload]
//! ```
//!
//! Payload bits are packed MSB-first and zero-padded to an octet boundary.

use crate::sbec::SbecMessage;
use crate::verify::{FieldParams, HashKey, VerificationTag, VerifyMessage};
use crate::{bits, Error, Result};

pub const HEADER_LEN: usize = 7;
const NO_SUB_BLOCK: u16 = 0xFFFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum MessageTag {
    Syndrome = 0x01,
    Disclose = 0x02,
    HashBlock = 0x03,
    Ack = 0x04,
    Nack = 0x05,
    HashSubBlocks = 0x06,
    BadIndices = 0x07,
}

impl TryFrom<u8> for MessageTag {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Ok(match v {
            0x01 => MessageTag::Syndrome,
            0x02 => MessageTag::Disclose,
            0x03 => MessageTag::HashBlock,
            0x04 => MessageTag::Ack,
            0x05 => MessageTag::Nack,
            0x06 => MessageTag::HashSubBlocks,
            0x07 => MessageTag::BadIndices,
            other => return Err(Error::Wire(format!("unknown tag 0x{other:02x}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolMessage {
    pub tag: MessageTag,
    pub sub_block_id: Option<u16>,
    /// One bit per element.
    pub payload: Vec<u8>,
}

pub fn encode_message(msg: &ProtocolMessage) -> Vec<u8> {
    let n_bits = u32::try_from(msg.payload.len()).expect("payload fits the 32-bit length field");
    let mut out = Vec::with_capacity(HEADER_LEN + msg.payload.len().div_ceil(8));
    out.push(msg.tag as u8);
    out.extend_from_slice(&n_bits.to_be_bytes());
    out.extend_from_slice(&msg.sub_block_id.unwrap_or(NO_SUB_BLOCK).to_be_bytes());
    out.extend(bits::pack(&msg.payload));
    out
}

pub fn decode_message(frame: &[u8]) -> Result<ProtocolMessage> {
    if frame.len() < HEADER_LEN {
        return Err(Error::Wire(format!("truncated header: {} octets", frame.len())));
    }
    let tag = MessageTag::try_from(frame[0])?;
    let n_bits = u32::from_be_bytes(frame[1..5].try_into().expect("4 octets")) as usize;
    let id = u16::from_be_bytes([frame[5], frame[6]]);
    let body = &frame[HEADER_LEN..];
    if body.len() != n_bits.div_ceil(8) {
        return Err(Error::Wire(format!(
            "payload of {n_bits} bits needs {} octets, frame carries {}",
            n_bits.div_ceil(8),
            body.len()
        )));
    }
    Ok(ProtocolMessage {
        tag,
        sub_block_id: (id != NO_SUB_BLOCK).then_some(id),
        payload: bits::unpack(body, n_bits)?,
    })
}

impl ProtocolMessage {
    pub fn from_sbec(sub_block_id: u16, msg: &SbecMessage) -> Self {
        let (tag, payload) = match msg {
            SbecMessage::Syndrome(s) => (MessageTag::Syndrome, s.clone()),
            SbecMessage::Disclose(v) => (MessageTag::Disclose, v.clone()),
        };
        ProtocolMessage {
            tag,
            sub_block_id: Some(sub_block_id),
            payload,
        }
    }

    pub fn into_sbec(self) -> Result<(u16, SbecMessage)> {
        let id = self
            .sub_block_id
            .ok_or_else(|| Error::Wire("SBEC message without sub-block id".into()))?;
        match self.tag {
            MessageTag::Syndrome => Ok((id, SbecMessage::Syndrome(self.payload))),
            MessageTag::Disclose => Ok((id, SbecMessage::Disclose(self.payload))),
            other => Err(Error::Wire(format!("{other:?} is not an SBEC message"))),
        }
    }

    pub fn from_verify(msg: &VerifyMessage, params: &FieldParams) -> Result<Self> {
        let (tag, payload) = match msg {
            VerifyMessage::HashBlock { key, tag } => {
                let mut p = key.to_bits(params);
                p.extend(tag.to_bits(params));
                (MessageTag::HashBlock, p)
            }
            VerifyMessage::Ack => (MessageTag::Ack, Vec::new()),
            VerifyMessage::Nack => (MessageTag::Nack, Vec::new()),
            VerifyMessage::HashSubBlocks(pairs) => {
                let p = pairs
                    .iter()
                    .flat_map(|(k, t)| k.to_bits(params).into_iter().chain(t.to_bits(params)))
                    .collect();
                (MessageTag::HashSubBlocks, p)
            }
            VerifyMessage::BadIndices(indices) => {
                let count = u16::try_from(indices.len())
                    .map_err(|_| Error::Contract("more than 65535 discarded indices".into()))?;
                let mut p = bits::from_u64(u64::from(count), 16);
                for &i in indices {
                    let i = u16::try_from(i)
                        .map_err(|_| Error::Contract(format!("sub-block index {i} exceeds 16 bits")))?;
                    p.extend(bits::from_u64(u64::from(i), 16));
                }
                (MessageTag::BadIndices, p)
            }
        };
        Ok(ProtocolMessage {
            tag,
            sub_block_id: None,
            payload,
        })
    }

    pub fn into_verify(self, params: &FieldParams) -> Result<VerifyMessage> {
        if self.sub_block_id.is_some() {
            return Err(Error::Wire("verification message with a sub-block id".into()));
        }
        let l = params.tag_bits();
        let p = self.payload;
        let expect_len = |ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(Error::Wire(format!("{:?} payload of {} bits", self.tag, p.len())))
            }
        };
        match self.tag {
            MessageTag::HashBlock => {
                expect_len(p.len() == 2 * l)?;
                Ok(VerifyMessage::HashBlock {
                    key: HashKey::from_bits(&p[..l], params)?,
                    tag: VerificationTag::from_bits(&p[l..], params)?,
                })
            }
            MessageTag::Ack => expect_len(p.is_empty()).map(|_| VerifyMessage::Ack),
            MessageTag::Nack => expect_len(p.is_empty()).map(|_| VerifyMessage::Nack),
            MessageTag::HashSubBlocks => {
                expect_len(!p.is_empty() && p.len().is_multiple_of(2 * l))?;
                p.chunks(2 * l)
                    .map(|pair| {
                        Ok((
                            HashKey::from_bits(&pair[..l], params)?,
                            VerificationTag::from_bits(&pair[l..], params)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(VerifyMessage::HashSubBlocks)
            }
            MessageTag::BadIndices => {
                expect_len(p.len() >= 16 && p.len().is_multiple_of(16))?;
                let count = bits::to_u64(&p[..16]) as usize;
                expect_len(p.len() == 16 * (count + 1))?;
                Ok(VerifyMessage::BadIndices(
                    p[16..].chunks(16).map(|c| bits::to_u64(c) as usize).collect(),
                ))
            }
            other => Err(Error::Wire(format!("{other:?} is not a verification message"))),
        }
    }
}
