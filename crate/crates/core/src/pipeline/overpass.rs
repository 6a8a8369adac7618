//! Blocking Overpass client with retries, rate limiting and cancellation.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::{Tile, TileData};
use crate::geometry::BBox;
use crate::osm::{parse_osm_xml, ParseError, ParsedXml};

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{tile}: HTTP status {status} after {attempts} attempt(s)")]
    Http { tile: String, status: u16, attempts: u32 },
    #[error("{tile}: {message} after {attempts} attempt(s)")]
    Transport {
        tile: String,
        message: String,
        attempts: u32,
    },
    #[error("{tile}: query for `{key}` is too large even on its own")]
    TooLarge { tile: String, key: String },
    #[error("{tile}: malformed response: {source}")]
    Parse {
        tile: String,
        #[source]
        source: ParseError,
    },
    #[error("{tile}: cancelled")]
    Cancelled { tile: String },
    #[error("cannot build HTTP client: {0}")]
    Client(String),
}

#[derive(Debug, Clone)]
pub struct OverpassConfig {
    pub endpoint: String,
    pub attempts: u32,
    /// Delay before the second attempt; doubled for each further one.
    pub backoff: Duration,
    /// Minimum spacing between the start of two requests.
    pub min_interval: Duration,
    pub timeout: Duration,
}

impl OverpassConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            attempts: 3,
            backoff: Duration::from_secs(2),
            min_interval: Duration::from_secs(1),
            timeout: Duration::from_secs(300),
        }
    }
}

/// Overpass QL selecting nodes, ways and relations carrying any of `keys`
/// inside `bbox`, with the nodes needed to build their geometry.
pub fn overpass_query(bbox: &BBox, keys: &[String]) -> String {
    let area = format!("({},{},{},{})", bbox.min_lat, bbox.min_lon, bbox.max_lat, bbox.max_lon);
    let mut q = String::from("[out:xml][timeout:180];\n(\n");
    for k in keys {
        let k = k.replace('\\', "\\\\").replace('"', "\\\"");
        q.push_str(&format!("  nwr[\"{k}\"]{area};\n"));
    }
    q.push_str(");\n(._;>;);\nout body;\n");
    q
}

enum Failure {
    TooLarge,
    Fatal(FetchError),
}

pub struct OverpassClient {
    config: OverpassConfig,
    http: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
    cancel: Arc<AtomicBool>,
}

impl OverpassClient {
    pub fn new(config: OverpassConfig) -> Result<Self, FetchError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .user_agent(concat!("osmbc/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| FetchError::Client(e.to_string()))?;
        Ok(Self {
            config,
            http,
            last_request: Mutex::new(None),
            cancel: Arc::new(AtomicBool::new(false)),
        })
    }

    /// Flag that aborts pending and future requests once set.
    pub fn cancel_handle(&self) -> Arc<AtomicBool> {
        self.cancel.clone()
    }

    /// Fetches one tile with a single union query, falling back to one
    /// query per key when the server rejects the union as too large.
    pub fn fetch_tile(&self, tile: &Tile, keys: &[String]) -> Result<TileData, FetchError> {
        let name = tile.to_string();
        match self.request(&name, &overpass_query(&tile.bbox, keys)) {
            Ok(p) => {
                return Ok(TileData {
                    features: p.features,
                    skipped: p.skipped,
                })
            }
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::TooLarge) => log::warn!("{name}: union query too large, querying keys one by one"),
        }
        let mut data = TileData::default();
        for key in keys {
            match self.request(&name, &overpass_query(&tile.bbox, std::slice::from_ref(key))) {
                Ok(p) => {
                    data.features.extend(p.features);
                    data.skipped.merge(&p.skipped);
                }
                Err(Failure::TooLarge) => {
                    return Err(FetchError::TooLarge {
                        tile: name,
                        key: key.clone(),
                    })
                }
                Err(Failure::Fatal(e)) => return Err(e),
            }
        }
        Ok(data)
    }

    fn request(&self, tile: &str, query: &str) -> Result<ParsedXml, Failure> {
        let attempts = self.config.attempts.max(1);
        let mut last = None;
        for attempt in 1..=attempts {
            if attempt > 1 {
                self.sleep(self.config.backoff * 2u32.pow(attempt - 2), tile)?;
            }
            self.throttle(tile)?;
            log::debug!("{tile}: request attempt {attempt}");
            let resp = match self.http.post(&self.config.endpoint).form(&[("data", query)]).send() {
                Ok(r) => r,
                Err(e) => {
                    last = Some(FetchError::Transport {
                        tile: tile.into(),
                        message: e.to_string(),
                        attempts: attempt,
                    });
                    continue;
                }
            };
            let status = resp.status().as_u16();
            match status {
                200 => {}
                413 => return Err(Failure::TooLarge),
                429 | 500..=599 => {
                    last = Some(FetchError::Http {
                        tile: tile.into(),
                        status,
                        attempts: attempt,
                    });
                    continue;
                }
                _ => {
                    return Err(Failure::Fatal(FetchError::Http {
                        tile: tile.into(),
                        status,
                        attempts: attempt,
                    }))
                }
            }
            let body = match resp.bytes() {
                Ok(b) => b,
                Err(e) => {
                    last = Some(FetchError::Transport {
                        tile: tile.into(),
                        message: e.to_string(),
                        attempts: attempt,
                    });
                    continue;
                }
            };
            let parsed = parse_osm_xml(&body).map_err(|source| {
                Failure::Fatal(FetchError::Parse {
                    tile: tile.into(),
                    source,
                })
            })?;
            if let Some(r) = parsed.remarks.iter().find(|r| r.contains("runtime error")) {
                if r.contains("out of memory") {
                    return Err(Failure::TooLarge);
                }
                last = Some(FetchError::Transport {
                    tile: tile.into(),
                    message: r.trim().to_string(),
                    attempts: attempt,
                });
                continue;
            }
            return Ok(parsed);
        }
        Err(Failure::Fatal(last.expect("at least one attempt")))
    }

    fn cancelled(&self, tile: &str) -> Result<(), Failure> {
        if self.cancel.load(Ordering::Relaxed) {
            return Err(Failure::Fatal(FetchError::Cancelled { tile: tile.into() }));
        }
        Ok(())
    }

    fn sleep(&self, d: Duration, tile: &str) -> Result<(), Failure> {
        let until = Instant::now() + d;
        loop {
            self.cancelled(tile)?;
            let now = Instant::now();
            if now >= until {
                return Ok(());
            }
            thread::sleep((until - now).min(Duration::from_millis(50)));
        }
    }

    fn throttle(&self, tile: &str) -> Result<(), Failure> {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(t) = *last {
            self.sleep(
                (t + self.config.min_interval).saturating_duration_since(Instant::now()),
                tile,
            )?;
        }
        self.cancelled(tile)?;
        *last = Some(Instant::now());
        Ok(())
    }
}
