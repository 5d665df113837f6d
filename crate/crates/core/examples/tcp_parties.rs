//! Runs a job as separate parties over loopback TCP (threads here, processes
//! with `colcp party`) and checks the result against the in-memory run.

use colcp::cli::{run_job_in_memory, run_party, Job};
use std::net::TcpListener;
use std::time::Duration;

fn main() {
    let dir = std::env::temp_dir().join(format!("colcp-tcp-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ports: Vec<u16> = (0..3)
        .map(|_| TcpListener::bind("127.0.0.1:0").unwrap())
        .map(|l| l.local_addr().unwrap().port())
        .collect();
    let topology = dir.join("topology.txt");
    let text: String = ports
        .iter()
        .enumerate()
        .map(|(i, p)| format!("{i} 127.0.0.1:{p}\n"))
        .collect();
    std::fs::write(&topology, text).unwrap();
    let job_text = "circuit = sample\ngates = 32\ninputs = 3\ncommit = cts\nipa = distributed\n";
    let job = dir.join("job.txt");
    std::fs::write(&job, job_text).unwrap();

    let seed = 11;
    let bundles: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..3)
            .map(|id| {
                let (topology, job) = (&topology, &job);
                s.spawn(move || run_party(id, topology, job, seed, Duration::from_secs(10)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let reference = run_job_in_memory(&Job::parse(job_text).unwrap(), 3, seed).unwrap();
    for (id, b) in bundles.into_iter().enumerate() {
        let b = b.expect("party run");
        println!(
            "party {id}: {} bundle bytes, identical to in-memory run: {}",
            b.to_bytes().len(),
            b == reference
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}
