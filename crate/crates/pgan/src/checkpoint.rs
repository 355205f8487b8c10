//! Sectioned model container.
//!
//! Layout: `PGCK`, u16 version, u32 section count, then per section a 4-byte
//! tag, a u64 payload length and the payload. All integers little-endian.
//! Networks use the core blob format; the anchor bank is stored as row
//! indices into the training split rather than copies of the rows.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use pgan_core::data::{ClassPriors, Dataset};
use pgan_core::models::{extract_features, ClassBank, FeatureExtractor, Generator, LatentConditioner, PGanModel};
use pgan_core::nn::blob::{self, Reader};
use pgan_core::nn::Network;
use pgan_core::training::Trained;

const MAGIC: &[u8; 4] = b"PGCK";
const VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub meta: BTreeMap<String, String>,
    pub nets: BTreeMap<String, Network>,
    /// Bank capacity and per-class row indices.
    pub bank: Option<(usize, Vec<Vec<usize>>)>,
    pub conditioner: Option<LatentConditioner>,
    pub priors: Option<Vec<f64>>,
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn get_str(r: &mut Reader<'_>) -> Result<String> {
    let n = r.u32()? as usize;
    Ok(String::from_utf8(r.take(n)?.to_vec())?)
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_f64s(out: &mut Vec<u8>, vs: &[f64]) {
    vs.iter().for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut sections: Vec<(&[u8; 4], Vec<u8>)> = Vec::new();

        let mut meta = Vec::new();
        put_u32(&mut meta, self.meta.len());
        for (k, v) in &self.meta {
            put_str(&mut meta, k);
            put_str(&mut meta, v);
        }
        sections.push((b"META", meta));

        let mut nets = Vec::new();
        put_u32(&mut nets, self.nets.len());
        for (name, net) in &self.nets {
            put_str(&mut nets, name);
            let b = blob::encode(net);
            nets.extend_from_slice(&(b.len() as u64).to_le_bytes());
            nets.extend_from_slice(&b);
        }
        sections.push((b"NETS", nets));

        if let Some((capacity, indices)) = &self.bank {
            let mut b = Vec::new();
            put_u32(&mut b, *capacity);
            put_u32(&mut b, indices.len());
            for ix in indices {
                put_u32(&mut b, ix.len());
                ix.iter().for_each(|&i| put_u32(&mut b, i));
            }
            sections.push((b"BANK", b));
        }
        if let Some(c) = &self.conditioner {
            let mut b = Vec::new();
            put_u32(&mut b, c.n_classes());
            put_u32(&mut b, c.latent_dim());
            for (m, v) in c.means.iter().zip(&c.variances) {
                put_f64s(&mut b, m);
                put_f64s(&mut b, v);
            }
            sections.push((b"COND", b));
        }
        if let Some(p) = &self.priors {
            let mut b = Vec::new();
            put_u32(&mut b, p.len());
            put_f64s(&mut b, p);
            sections.push((b"PRIO", b));
        }

        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_u32(&mut out, sections.len());
        for (tag, payload) in sections {
            out.extend_from_slice(tag);
            out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
            out.extend_from_slice(&payload);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAGIC {
            bail!("not a checkpoint (bad magic)");
        }
        let version = r.u16()?;
        if version != VERSION {
            bail!("unsupported checkpoint version {version}");
        }
        let mut ck = Checkpoint {
            meta: BTreeMap::new(),
            nets: BTreeMap::new(),
            bank: None,
            conditioner: None,
            priors: None,
        };
        for _ in 0..r.u32()? {
            let tag: [u8; 4] = r.take(4)?.try_into()?;
            let len = r.u64()? as usize;
            let mut s = Reader::new(r.take(len)?);
            match &tag {
                b"META" => {
                    for _ in 0..s.u32()? {
                        let k = get_str(&mut s)?;
                        ck.meta.insert(k, get_str(&mut s)?);
                    }
                }
                b"NETS" => {
                    for _ in 0..s.u32()? {
                        let name = get_str(&mut s)?;
                        let n = s.u64()? as usize;
                        ck.nets.insert(name, blob::decode(s.take(n)?)?);
                    }
                }
                b"BANK" => {
                    let capacity = s.u32()? as usize;
                    let k = s.u32()? as usize;
                    let mut indices = Vec::with_capacity(k);
                    for _ in 0..k {
                        let n = s.u32()? as usize;
                        indices.push((0..n).map(|_| s.u32().map(|v| v as usize)).collect::<Result<_, _>>()?);
                    }
                    ck.bank = Some((capacity, indices));
                }
                b"COND" => {
                    let k = s.u32()? as usize;
                    let d = s.u32()? as usize;
                    let mut read = |n: usize| (0..n).map(|_| s.f64()).collect::<Result<Vec<f64>, _>>();
                    let (mut means, mut variances) = (Vec::new(), Vec::new());
                    for _ in 0..k {
                        means.push(read(d)?);
                        variances.push(read(d)?);
                    }
                    ck.conditioner = Some(LatentConditioner { means, variances });
                }
                b"PRIO" => {
                    let k = s.u32()? as usize;
                    ck.priors = Some((0..k).map(|_| s.f64()).collect::<Result<_, _>>()?);
                }
                // Unknown sections are skipped for forward compatibility.
                _ => {}
            }
        }
        Ok(ck)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).with_context(|| format!("cannot write {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("cannot read checkpoint {}", path.display()))?;
        Self::decode(&bytes).with_context(|| format!("in {}", path.display()))
    }

    pub fn from_trained(t: &Trained, mut meta: BTreeMap<String, String>) -> Self {
        let mut nets = BTreeMap::new();
        match &t.extractor {
            FeatureExtractor::Identity { dim } => {
                meta.insert("extractor".into(), format!("identity:{dim}"));
            }
            FeatureExtractor::Net(n) => {
                meta.insert("extractor".into(), "net".into());
                nets.insert("extractor".into(), n.clone());
            }
        }
        nets.insert("classifier".into(), t.classifier.clone());
        meta.insert("method".into(), t.method.name().into());
        let mut ck = Checkpoint { meta, nets, bank: None, conditioner: None, priors: None };
        if let Some(m) = &t.pgan {
            ck.add_pgan(m);
        }
        ck
    }

    /// Snapshot of a model mid-training, scored with its adversarial `C`.
    pub fn from_pgan(m: &PGanModel, meta: BTreeMap<String, String>) -> Self {
        let t = Trained {
            method: pgan_core::training::Method::PGan,
            extractor: m.extractor.clone(),
            classifier: m.classifier.clone(),
            curve: Default::default(),
            pgan: None,
            train_counts: Vec::new(),
        };
        let mut ck = Self::from_trained(&t, meta);
        ck.add_pgan(m);
        ck
    }

    fn add_pgan(&mut self, m: &PGanModel) {
        self.nets.insert("adversarial_classifier".into(), m.classifier.clone());
        self.nets.insert("critic".into(), m.critic.clone());
        self.nets.insert("generator_q".into(), m.generator.q_net.clone());
        self.nets.insert("generator_p".into(), m.generator.p_head.clone());
        self.meta.insert("latent_dim".into(), m.generator.latent_dim.to_string());
        self.bank = Some((m.generator.bank.capacity(), m.generator.bank.all_indices().to_vec()));
        self.conditioner = m.generator.conditioner.clone();
        self.priors = Some(m.priors.priors.clone());
    }

    fn net(&self, name: &str) -> Result<&Network> {
        self.nets.get(name).ok_or_else(|| anyhow!("checkpoint has no `{name}` network"))
    }

    pub fn extractor(&self) -> Result<FeatureExtractor> {
        match self.meta.get("extractor").map(String::as_str) {
            Some("net") => Ok(FeatureExtractor::Net(self.net("extractor")?.clone())),
            Some(s) if s.starts_with("identity:") => Ok(FeatureExtractor::Identity { dim: s[9..].parse()? }),
            other => bail!("checkpoint extractor entry {other:?} is not recognised"),
        }
    }

    pub fn classifier(&self) -> Result<&Network> {
        self.net("classifier")
    }

    /// Rebuilds the full model, re-reading bank anchors from the training
    /// split it was trained on. `None` when the checkpoint has no generator.
    pub fn pgan_model(&self, train: &Dataset) -> Result<Option<PGanModel>> {
        let Some((capacity, indices)) = &self.bank else { return Ok(None) };
        let extractor = self.extractor()?;
        let feats = extract_features(&extractor, &train.features)?;
        let bank = ClassBank::from_indices(&feats, indices.clone(), *capacity)?;
        let latent_dim: usize = self.meta.get("latent_dim").ok_or_else(|| anyhow!("missing latent_dim"))?.parse()?;
        let priors = ClassPriors::from_priors(self.priors.clone().ok_or_else(|| anyhow!("missing priors"))?)?;
        Ok(Some(PGanModel {
            extractor,
            classifier: self.net("adversarial_classifier")?.clone(),
            critic: self.net("critic")?.clone(),
            generator: Generator {
                q_net: self.net("generator_q")?.clone(),
                p_head: self.net("generator_p")?.clone(),
                bank,
                latent_dim,
                conditioner: self.conditioner.clone(),
            },
            priors,
        }))
    }
}
