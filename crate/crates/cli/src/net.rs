use std::time::Duration;

use ols_core::dataload::{FetchError, Fetcher};

const MAX_BODY: u64 = 2 << 30;

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_connect(Some(Duration::from_secs(20)))
        .timeout_global(Some(Duration::from_secs(600)))
        .build()
        .into()
}

fn fetch_with(agent: &ureq::Agent, url: &str) -> Result<Vec<u8>, FetchError> {
    let failed = |message: String| FetchError::Failed {
        location: url.to_string(),
        message,
    };
    let mut response = agent.get(url).call().map_err(|e| match e {
        ureq::Error::StatusCode(404) | ureq::Error::StatusCode(410) => FetchError::NotFound { location: url.to_string() },
        other => failed(other.to_string()),
    })?;
    response
        .body_mut()
        .with_config()
        .limit(MAX_BODY)
        .read_to_vec()
        .map_err(|e| failed(e.to_string()))
}

/// Plain HTTP(S) GET.
pub fn get(url: &str) -> Result<Vec<u8>, FetchError> {
    fetch_with(&agent(), url)
}

pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new() -> Self {
        HttpFetcher { agent: agent() }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, location: &str) -> Result<Vec<u8>, FetchError> {
        fetch_with(&self.agent, location)
    }
}
