//! In-process collaborative sessions: deal preprocessing, spawn one thread per
//! party over an in-memory network and run the commit/assign/prove/link
//! pipeline.

use std::net::TcpListener;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::algebra::{GeneratorSet, Scalar};
use crate::bulletproofs::{
    pipeline_requirements, run_pipeline, CollabOptions, ExternalCommitment, LinkSetup,
    PipelineOutput,
};
use crate::circuit::Circuit;
use crate::cplink::SsKeys;
use crate::error::{Error, Result};
use crate::mpc::{
    deal, run_in_memory, AuthShare, DealerRequest, MpcCounters, Party, Preprocessing,
};
use crate::pedersen::{Commitment, CommitmentKey, OwnershipMap};
use crate::transport::{Network, Topology, TrafficStats, TransportError, DEFAULT_TIMEOUT};

/// Where the session's external commitment comes from.
#[derive(Clone, Debug)]
pub enum SessionExternal<'a> {
    /// Created during the commit phase under this key.
    Create(&'a CommitmentKey),
    /// Already published; party `p` knows `opening_parts[p]` and the opening
    /// is their sum.
    Existing {
        c_hat: Commitment,
        opening_parts: Vec<Scalar>,
    },
}

#[derive(Clone, Debug)]
pub struct SessionLink<'a> {
    pub keys: &'a SsKeys,
    pub external: SessionExternal<'a>,
}

impl<'a> SessionLink<'a> {
    pub fn create(keys: &'a SsKeys, ck_ext: &'a CommitmentKey) -> Self {
        Self {
            keys,
            external: SessionExternal::Create(ck_ext),
        }
    }

    pub fn existing(keys: &'a SsKeys, c_hat: Commitment, opening_parts: Vec<Scalar>) -> Self {
        Self {
            keys,
            external: SessionExternal::Existing {
                c_hat,
                opening_parts,
            },
        }
    }
}

/// One party's result together with its cost counters.
#[derive(Clone, Debug)]
pub struct PartyOutcome {
    pub output: PipelineOutput,
    pub counters: MpcCounters,
    pub traffic: TrafficStats,
}

#[derive(Clone, Debug)]
pub struct Session<'a> {
    pub circuit: &'a Circuit,
    pub map: OwnershipMap,
    /// Every slot's value; each party only reads its own slots.
    pub values: Vec<Scalar>,
    pub opts: CollabOptions,
    pub link: Option<SessionLink<'a>>,
    pub seed: u64,
}

impl<'a> Session<'a> {
    /// Contiguous ownership of the circuit's inputs among `n_parties`.
    pub fn new(
        circuit: &'a Circuit,
        n_parties: usize,
        values: Vec<Scalar>,
        opts: CollabOptions,
    ) -> Result<Self> {
        if values.len() != circuit.cs.m {
            return Err(Error::LengthMismatch {
                expected: circuit.cs.m,
                got: values.len(),
            });
        }
        Ok(Self {
            map: OwnershipMap::contiguous(circuit.cs.m, n_parties)?,
            circuit,
            values,
            opts,
            link: None,
            seed: 0,
        })
    }

    pub fn with_link(mut self, link: SessionLink<'a>) -> Self {
        self.link = Some(link);
        self
    }

    pub fn with_map(mut self, map: OwnershipMap) -> Result<Self> {
        if map.n_slots() != self.circuit.cs.m {
            return Err(Error::LengthMismatch {
                expected: self.circuit.cs.m,
                got: map.n_slots(),
            });
        }
        self.map = map;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_parties(&self) -> usize {
        self.map.n_parties()
    }

    pub fn requirements(&self) -> DealerRequest {
        let mut req = pipeline_requirements(
            self.circuit,
            self.n_parties(),
            self.opts,
            self.link.is_some(),
        );
        if let Some(SessionLink {
            external: SessionExternal::Existing { .. },
            ..
        }) = &self.link
        {
            req.input_masks += 1;
        }
        req
    }

    /// Deterministic preprocessing for this session.
    pub fn deal(&self) -> Result<Vec<Preprocessing>> {
        deal(
            self.n_parties(),
            &self.requirements(),
            &mut ChaCha20Rng::seed_from_u64(self.seed ^ 0x6465_616c),
        )
    }

    pub fn own_values(&self, party: usize) -> Vec<Scalar> {
        self.map
            .slots_of(party)
            .iter()
            .map(|s| self.values[*s])
            .collect()
    }

    /// One party's part of the session.
    pub fn run_party(&self, party: &mut Party, gens: &GeneratorSet) -> Result<PartyOutcome> {
        let link = match &self.link {
            None => None,
            Some(l) => {
                let external = match &l.external {
                    SessionExternal::Create(ck) => ExternalCommitment::Create(ck),
                    SessionExternal::Existing {
                        c_hat,
                        opening_parts,
                    } => {
                        if opening_parts.len() != party.n() {
                            return Err(Error::LengthMismatch {
                                expected: party.n(),
                                got: opening_parts.len(),
                            });
                        }
                        let me = party.id();
                        let mut o_hat = AuthShare::zero(me);
                        for (owner, part) in opening_parts.iter().enumerate() {
                            o_hat =
                                o_hat + party.share_input(owner, (owner == me).then_some(*part))?;
                        }
                        ExternalCommitment::Existing {
                            c_hat: *c_hat,
                            o_hat,
                        }
                    }
                };
                Some(LinkSetup {
                    ek: &l.keys.ek,
                    external,
                })
            }
        };
        let output = run_pipeline(
            party,
            self.circuit,
            gens,
            &self.map,
            &self.own_values(party.id()),
            link,
            self.opts,
        )?;
        Ok(PartyOutcome {
            output,
            counters: party.counters(),
            traffic: party.stats(),
        })
    }

    /// Runs party `net.party_id()` over an already connected network.
    pub fn run_on(&self, net: Network) -> Result<PartyOutcome> {
        let id = net.party_id();
        let prep = self
            .deal()?
            .into_iter()
            .nth(id)
            .ok_or_else(|| Error::InvalidParameter(format!("party {id} out of range")))?;
        let mut party = Party::new(net, prep, self.seed)?;
        self.run_party(&mut party, &GeneratorSet::new(self.circuit.cs.n))
    }

    /// Runs all parties in this process; returns every party's outcome.
    pub fn run_in_memory(&self) -> Result<Vec<PartyOutcome>> {
        let gens = GeneratorSet::new(self.circuit.cs.n);
        let preps = self.deal()?;
        run_in_memory(preps, self.seed, |p| self.run_party(p, &gens))
            .into_iter()
            .collect()
    }

    /// Runs all parties in this process over loopback TCP.
    pub fn run_tcp_loopback(&self) -> Result<Vec<PartyOutcome>> {
        let n = self.n_parties();
        let listeners = (0..n)
            .map(|_| TcpListener::bind("127.0.0.1:0"))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(TransportError::from)?;
        let endpoints = listeners
            .iter()
            .map(|l| l.local_addr().map(|a| a.to_string()))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(TransportError::from)?;
        let topology = Topology::new(endpoints);
        let preps = self.deal()?;
        let gens = GeneratorSet::new(self.circuit.cs.n);
        std::thread::scope(|s| {
            let handles: Vec<_> = listeners
                .into_iter()
                .zip(preps)
                .enumerate()
                .map(|(id, (listener, prep))| {
                    let (topology, gens) = (&topology, &gens);
                    s.spawn(move || {
                        let net =
                            Network::tcp_with_listener(id, listener, topology, DEFAULT_TIMEOUT)?;
                        let mut party = Party::new(net, prep, self.seed)?;
                        self.run_party(&mut party, gens)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("party thread panicked"))
                .collect()
        })
    }
}
