//! Hiding an encrypted bitstring in a sample from a covertext model.
//!
//! The message is XOR-ed with a uniformly random key, which makes the
//! ciphertext uniform. The ciphertext is then coupled with the covertext
//! model, so the stegotext is distributed exactly like covertext.

use serde::{Deserialize, Serialize};

use crate::codec::{channel_likelihoods, MessageCoder, MessageSpace, Variant};
use crate::error::{Error, Result};
use crate::imec::CouplerOptions;
use crate::prob::Dist;
use crate::rng::rng_from_seed;
use crate::seqmodel::{log_likelihood, Autoregressive};

/// A one-time pad of `len` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivateKey {
    bits: Vec<u8>,
}

impl PrivateKey {
    /// Uniformly random key from a seeded generator.
    pub fn generate(len: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        Self { bits: (0..len).map(|_| rng.gen_range(0..2u8)).collect() }
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        check_bits(&bits)?;
        Ok(Self { bits })
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        Ok(Self { bits: hex_to_bits(hex, len)? })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_hex(&self) -> String {
        bits_to_hex(&self.bits)
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().find(|&&b| b > 1) {
        Some(b) => Err(Error::InvalidArgument(format!("bit value {b}"))),
        None => Ok(()),
    }
}

/// Hex encoding, most significant bit first within each byte; a trailing
/// partial byte is padded with zero bits.
pub fn bits_to_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b << (7 - i))))
        .collect();
    hex::encode(bytes)
}

/// Inverse of [`bits_to_hex`] for a known bit count.
pub fn hex_to_bits(hex_str: &str, len: usize) -> Result<Vec<u8>> {
    let bytes = hex::decode(hex_str.trim()).map_err(|e| Error::InvalidArgument(format!("bad hex: {e}")))?;
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::LengthMismatch { left: bytes.len() * 8, right: len });
    }
    Ok((0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect())
}

/// Component-wise exclusive-or with the key.
pub fn encrypt(message: &[u8], key: &PrivateKey) -> Result<Vec<u8>> {
    if message.len() != key.len() {
        return Err(Error::LengthMismatch { left: message.len(), right: key.len() });
    }
    check_bits(message)?;
    Ok(message.iter().zip(key.bits()).map(|(m, k)| m ^ k).collect())
}

pub fn decrypt(ciphertext: &[u8], key: &PrivateKey) -> Result<Vec<u8>> {
    encrypt(ciphertext, key)
}

/// Uniform prior over bitstrings cut into chunks of at most `chunk_bits`
/// bits; each chunk is one token.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkedBits {
    widths: Vec<usize>,
    vocab: usize,
}

impl ChunkedBits {
    pub fn new(bits: usize, chunk_bits: usize) -> Result<Self> {
        if chunk_bits == 0 || chunk_bits > 16 {
            return Err(Error::InvalidArgument(format!("chunk width {chunk_bits} outside 1..=16")));
        }
        let mut widths = vec![chunk_bits; bits / chunk_bits];
        if !bits.is_multiple_of(chunk_bits) {
            widths.push(bits % chunk_bits);
        }
        let vocab = 1usize << widths.iter().copied().max().unwrap_or(0);
        Ok(Self { widths, vocab })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn to_tokens(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let total: usize = self.widths.iter().sum();
        if bits.len() != total {
            return Err(Error::LengthMismatch { left: bits.len(), right: total });
        }
        check_bits(bits)?;
        let mut out = Vec::with_capacity(self.widths.len());
        let mut pos = 0;
        for &w in &self.widths {
            out.push(bits[pos..pos + w].iter().fold(0usize, |acc, &b| (acc << 1) | b as usize));
            pos += w;
        }
        Ok(out)
    }

    pub fn to_bits(&self, tokens: &[usize]) -> Vec<u8> {
        let mut out = Vec::new();
        for (&t, &w) in tokens.iter().zip(&self.widths) {
            for i in (0..w).rev() {
                out.push(((t >> i) & 1) as u8);
            }
        }
        out
    }

    pub fn space(&self) -> MessageSpace<ChunkedBits> {
        MessageSpace {
            prior: self.clone(),
            len: self.widths.len(),
            components: self.widths.iter().map(|&w| Dist::uniform(1 << w)).collect(),
        }
    }
}

impl Autoregressive for ChunkedBits {
    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn max_len(&self) -> Option<usize> {
        Some(self.widths.len())
    }

    fn next_dist(&self, prefix: &[usize]) -> Dist {
        match self.widths.get(prefix.len()) {
            Some(&w) => {
                let mut p = vec![0.0; self.vocab];
                let n = 1usize << w;
                for slot in p.iter_mut().take(n) {
                    *slot = 1.0 / n as f64;
                }
                Dist::new(p).expect("uniform chunk")
            }
            None => Dist::uniform(self.vocab),
        }
    }
}

/// Settings shared by the encoder and the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StegoConfig {
    pub variant: Variant,
    pub merging: bool,
    pub seed: u64,
    /// Number of stegotext symbols.
    pub len: usize,
    /// Bits per message token for the factored and prefix-tree variants.
    pub chunk_bits: usize,
}

impl StegoConfig {
    fn coder(&self, bits: usize) -> Result<(ChunkedBits, MessageCoder<ChunkedBits>)> {
        let chunks = ChunkedBits::new(bits, self.chunk_bits)?;
        let options = CouplerOptions { seed: self.seed, merging: self.merging, record_details: false };
        let coder = MessageCoder::new(self.variant, &chunks.space(), options)?;
        Ok((chunks, coder))
    }
}

/// Output of one stego encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct StegoTranscript {
    pub stegotext: Vec<usize>,
    /// Point estimate of the ciphertext from the stegotext alone.
    pub decoded: Vec<u8>,
    /// `log2 P(stegotext | ciphertext)`.
    pub log2_likelihood: f64,
    /// `-log2` of the posterior probability of the true ciphertext.
    pub residual_bits: f64,
    /// Per-position entropy of the chosen block posterior.
    pub partition_entropies: Vec<f64>,
}

/// Sample a stegotext carrying `ciphertext`.
pub fn stego_encode<S: Autoregressive + ?Sized>(ciphertext: &[u8], cover: &S, cfg: &StegoConfig) -> Result<StegoTranscript> {
    let (chunks, mut coder) = cfg.coder(ciphertext.len())?;
    let x = chunks.to_tokens(ciphertext)?;
    for _ in 0..cfg.len {
        let nu = cover.next_dist(coder.emitted());
        coder.encode_step(&x, &nu)?;
    }
    let log2_likelihood = coder.records().iter().map(|r| r.log2_prob.unwrap_or(0.0)).sum();
    let decoded = chunks.to_bits(&coder.map_estimate());
    let residual_bits = -coder.posterior_of(&x).log2();
    Ok(StegoTranscript {
        stegotext: coder.emitted().to_vec(),
        decoded,
        log2_likelihood,
        residual_bits,
        partition_entropies: coder.records().iter().map(|r| r.partition_entropy).collect(),
    })
}

/// Recover the ciphertext estimate from a stegotext.
pub fn stego_decode<S: Autoregressive + ?Sized>(stegotext: &[usize], bits: usize, cover: &S, cfg: &StegoConfig) -> Result<Vec<u8>> {
    if stegotext.len() != cfg.len {
        return Err(Error::LengthMismatch { left: stegotext.len(), right: cfg.len });
    }
    let (chunks, mut coder) = cfg.coder(bits)?;
    for &y in stegotext {
        let nu = cover.next_dist(coder.emitted());
        coder.decode_step(&nu, y)?;
    }
    Ok(chunks.to_bits(&coder.map_estimate()))
}

/// Largest gap between the stegotext distribution under uniform ciphertext
/// and the covertext distribution, by exact summation over every ciphertext
/// and every stegotext of length `cfg.len`. Exponential; small inputs only.
pub fn security_gap<S: Autoregressive + ?Sized>(bits: usize, cover: &S, cfg: &StegoConfig) -> Result<f64> {
    let (chunks, coder) = cfg.coder(bits)?;
    let n = 1usize << bits;
    let messages: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let b: Vec<u8> = (0..bits).rev().map(|k| ((i >> k) & 1) as u8).collect();
            chunks.to_tokens(&b)
        })
        .collect::<Result<_>>()?;
    let table = channel_likelihoods(&coder, &messages, cover, cfg.len)?;
    let mut gap: f64 = 0.0;
    let mut covered = 0.0;
    for (y, likes) in &table {
        let stego: f64 = likes.iter().sum::<f64>() / n as f64;
        let c: f64 = (0..y.len()).map(|j| cover.next_dist(&y[..j]).get(y[j])).product();
        covered += c;
        gap = gap.max((stego - c).abs());
    }
    Ok(gap.max((1.0 - covered).abs()))
}

/// Output of one linguistic encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticTranscript {
    pub stegotext: Vec<usize>,
    /// Point estimate of the plaintext from the stegotext alone.
    pub decoded: Vec<usize>,
    /// Leading plaintext tokens the estimate gets right.
    pub correct_prefix: usize,
    pub exact: bool,
}

fn linguistic_coder<M: Autoregressive + Clone>(prior: &M, len: usize, cfg: &StegoConfig) -> Result<MessageCoder<M>> {
    let space = MessageSpace::with_uniform_components(prior.clone(), len);
    let options = CouplerOptions { seed: cfg.seed, merging: cfg.merging, record_details: false };
    MessageCoder::new(cfg.variant, &space, options)
}

/// Hide a token plaintext drawn from `prior` in `cfg.len` covertext symbols.
/// The prefix-tree and tabular variants use `prior` itself; the factored
/// variant treats every token as uniform. `cfg.chunk_bits` is unused.
pub fn linguistic_encode<M, S>(plaintext: &[usize], prior: &M, cover: &S, cfg: &StegoConfig) -> Result<LinguisticTranscript>
where
    M: Autoregressive + Clone,
    S: Autoregressive + ?Sized,
{
    if log_likelihood(prior, plaintext) == f64::NEG_INFINITY {
        return Err(Error::Corruption("plaintext has zero prior probability".into()));
    }
    let mut coder = linguistic_coder(prior, plaintext.len(), cfg)?;
    for _ in 0..cfg.len {
        let nu = cover.next_dist(coder.emitted());
        coder.encode_step(plaintext, &nu)?;
    }
    let decoded = coder.map_estimate();
    let correct_prefix = plaintext.iter().zip(&decoded).take_while(|(a, b)| a == b).count();
    Ok(LinguisticTranscript {
        stegotext: coder.emitted().to_vec(),
        exact: decoded == plaintext,
        decoded,
        correct_prefix,
    })
}

/// Recover a plaintext estimate of `plain_len` tokens from a stegotext.
pub fn linguistic_decode<M, S>(stegotext: &[usize], plain_len: usize, prior: &M, cover: &S, cfg: &StegoConfig) -> Result<Vec<usize>>
where
    M: Autoregressive + Clone,
    S: Autoregressive + ?Sized,
{
    let mut coder = linguistic_coder(prior, plain_len, cfg)?;
    for &y in stegotext {
        let nu = cover.next_dist(coder.emitted());
        coder.decode_step(&nu, y)?;
    }
    Ok(coder.map_estimate())
}
