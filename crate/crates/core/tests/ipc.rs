mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::*;
use mrdi_core::algebra::{ContextHandle, Polynomial};
use mrdi_core::ipc::*;
use mrdi_core::mrdi::{save_value, GlobalSerializerState, Mode, Value};
use mrdi_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uuid::Uuid;

fn pool(n: usize) -> WorkerPool {
    WorkerPool::spawn(n, &worker_bin(), Arc::new(GlobalSerializerState::new())).unwrap()
}

fn x_plus_one() -> Polynomial {
    let r = qq_ring(&["x"]);
    Polynomial::new(&r, vec![(vec![1], q(1)), (vec![0], q(1))]).unwrap()
}

#[test]
fn spawn_sizes() {
    let p = pool(1);
    assert_eq!(p.worker_states(), vec![WorkerState::Idle]);
    assert!(matches!(
        WorkerPool::spawn(0, &worker_bin(), Arc::new(GlobalSerializerState::new())),
        Err(Error::Validation(_))
    ));
    let six = pool(6);
    assert_eq!(six.size(), 6);
    assert!(six.worker_states().iter().all(|s| *s == WorkerState::Idle));
}

#[test]
fn bad_executable_is_a_transport_error() {
    let cmd = WorkerCommand::new("/nonexistent/mrdi-worker");
    let r = WorkerPool::spawn(2, &cmd, Arc::new(GlobalSerializerState::new()));
    assert!(matches!(r, Err(Error::Transport(_))));
}

#[test]
fn remote_calls() {
    let p = pool(2);
    let sq = p.remote_call("poly_square", &[Value::Polynomial(x_plus_one())]).unwrap();
    let local = x_plus_one().mul(&x_plus_one()).unwrap();
    assert_eq!(sq, Value::Polynomial(local.clone()));
    assert_eq!(sq.as_polynomial().unwrap().parent().id(), qq_ring(&["x"]).id());
    assert_eq!(sq.to_string(), "x^2 + 2*x + 1");

    assert_eq!(p.remote_call("identity", &[Value::from(42)]).unwrap(), Value::from(42));
    match p.remote_call("unregistered_fn", &[Value::from(1)]) {
        Err(Error::Remote(msg)) => assert!(msg.contains("unknown function")),
        other => panic!("expected a remote failure, got {other:?}"),
    }
    // A failed call leaves the worker usable.
    assert_eq!(p.remote_call("identity", &[Value::from(-7)]).unwrap(), Value::from(-7));
    assert!(p.worker_states().iter().all(|s| *s == WorkerState::Idle));
}

#[test]
fn worker_created_contexts_flow_back() {
    let p = pool(2);
    let m = mrdi_core::algebra::matrix::int_poly_matrix(&zt(), &[vec![vec![0, 1], vec![1]], vec![vec![1], vec![0, 1]]])
        .unwrap();
    let items: Vec<Vec<Value>> = [101i64, 103, 107, 109]
        .iter()
        .map(|&pr| vec![Value::Matrix(m.clone()), Value::from(pr), Value::from(2)])
        .collect();
    let out = p.parallel_map("det_mod_p", &items).unwrap();
    for (v, pr) in out.iter().zip([101u64, 103, 107, 109]) {
        let poly = v.as_polynomial().unwrap();
        let expect = ContextHandle::univariate(&ContextHandle::prime_field(pr).unwrap(), "t").unwrap();
        assert_eq!(poly.parent(), &expect);
        assert_eq!(poly.to_string(), format!("t^2 + {}", pr - 1));
        assert!(p.global().uuid_of(&expect).is_some());
    }
    // Those contexts can now be sent back to any worker.
    let again = p.remote_call("identity", &[out[0].clone()]).unwrap();
    assert_eq!(again, out[0]);
}

fn load_contexts(entries: &[TapEntry]) -> Vec<(usize, Uuid, Vec<Uuid>)> {
    entries
        .iter()
        .filter_map(|e| match &e.message {
            Message::LoadContext { uuid, doc } => Some((e.worker, *uuid, doc.type_tree.uuids())),
            _ => None,
        })
        .collect()
}

#[test]
fn contexts_delivered_once_in_dependency_order() {
    let p = pool(3);
    p.enable_tap();
    let inner = zt();
    let outer = ContextHandle::univariate(&inner, "u").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let items: Vec<Vec<Value>> = (0..30).map(|_| vec![Value::Polynomial(random_poly(&mut rng, &outer, 3, 3))]).collect();
    let out = p.parallel_map("poly_square", &items).unwrap();
    for (o, i) in out.iter().zip(&items) {
        let x = i[0].as_polynomial().unwrap();
        assert_eq!(o, &Value::Polynomial(x.mul(x).unwrap()));
    }
    let loads = load_contexts(&p.tap_entries());
    let mut seen: HashSet<(usize, Uuid)> = HashSet::new();
    for (w, u, deps) in &loads {
        assert!(seen.insert((*w, *u)), "context {u} sent twice to worker {w}");
        for d in deps {
            assert!(seen.contains(&(*w, *d)), "context {u} sent before its dependency {d}");
        }
    }
    let g = p.global();
    let (ui, uo) = (g.uuid_of(&inner).unwrap(), g.uuid_of(&outer).unwrap());
    for (w, u, _) in &loads {
        if *u == uo {
            assert!(seen.contains(&(*w, ui)));
        }
    }
}

#[test]
fn ensure_contexts_is_idempotent() {
    let p = pool(1);
    let outer = ContextHandle::univariate(&zt(), "u").unwrap();
    p.global().register_context(&outer);
    let doc = save_value(&Value::Ring(outer.clone()), Mode::Ipc, p.global()).unwrap();
    assert_eq!(p.ensure_contexts(0, &doc.type_tree).unwrap(), 2);
    assert_eq!(p.ensure_contexts(0, &doc.type_tree).unwrap(), 0);
    let bare = save_value(&Value::from(5), Mode::Ipc, p.global()).unwrap();
    assert_eq!(p.ensure_contexts(0, &bare.type_tree).unwrap(), 0);
    assert!(p.ensure_contexts(3, &bare.type_tree).is_err());
}

#[test]
fn parallel_map_contract() {
    let p = pool(2);
    assert!(p.parallel_map("identity", &[]).unwrap().is_empty());
    let items: Vec<Vec<Value>> = (0..25).map(|i| vec![Value::from(i)]).collect();
    let out = p.parallel_map("identity", &items).unwrap();
    assert_eq!(out, (0..25).map(Value::from).collect::<Vec<_>>());

    let mut bad = items.clone();
    bad[17] = vec![Value::from(1), Value::from(2)];
    bad[9] = vec![Value::Polynomial(x_plus_one()), Value::from(3)];
    match p.parallel_map("poly_square", &bad) {
        Err(Error::MapItem { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected an item failure, got {other:?}"),
    }
    let mut one_bad: Vec<Vec<Value>> = (0..12).map(|_| vec![Value::Polynomial(x_plus_one())]).collect();
    one_bad[7] = vec![Value::from(3)];
    match p.parallel_map("poly_square", &one_bad) {
        Err(Error::MapItem { index, message }) => {
            assert_eq!(index, 7);
            assert!(message.contains("expects a polynomial"));
        }
        other => panic!("expected an item failure, got {other:?}"),
    }
}

#[test]
fn results_independent_of_pool_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ring = qq_ring(&["x", "y"]);
    let items: Vec<Vec<Value>> = (0..16)
        .map(|_| vec![Value::Polynomial(random_poly(&mut rng, &ring, 4, 3)), Value::Polynomial(random_poly(&mut rng, &ring, 4, 3))])
        .collect();
    let serial: Vec<Value> = items
        .iter()
        .map(|a| Value::Polynomial(a[0].as_polynomial().unwrap().mul(a[1].as_polynomial().unwrap()).unwrap()))
        .collect();
    for n in [1, 2, 4] {
        assert_eq!(pool(n).parallel_map("poly_mul", &items).unwrap(), serial, "pool size {n}");
    }
}

#[test]
fn shutdown_semantics() {
    let p = Arc::new(pool(2));
    let m = mrdi_core::workloads::detcrt_synthetic(3).unwrap();
    let busy = {
        let p = p.clone();
        std::thread::spawn(move || p.remote_call("det_mod_p", &[Value::Matrix(m), Value::from(2_147_483_647i64), Value::from(192)]))
    };
    while !p.worker_states().contains(&WorkerState::Busy) && !busy.is_finished() {
        std::thread::yield_now();
    }
    p.shutdown();
    // The in-flight call was drained, not cut off.
    assert!(busy.join().unwrap().is_ok());
    assert!(matches!(p.remote_call("identity", &[Value::from(1)]), Err(Error::PoolClosed)));
    shutdown_pool(&p);
    assert!(p.worker_states().iter().all(|s| *s == WorkerState::Dead));
}

#[test]
fn dead_worker_is_reported() {
    // A worker whose executable exits immediately never answers.
    let cmd = WorkerCommand { program: "/bin/true".into(), args: vec![], env: vec![] };
    let p = WorkerPool::spawn(1, &cmd, Arc::new(GlobalSerializerState::new())).unwrap();
    std::thread::sleep(std::time::Duration::from_millis(50));
    let first = p.remote_call("identity", &[Value::from(1)]);
    assert!(matches!(first, Err(Error::Transport(_))), "{first:?}");
    assert_eq!(p.worker_states(), vec![WorkerState::Dead]);
    assert!(matches!(p.remote_call("identity", &[Value::from(1)]), Err(Error::Transport(_))));
}

#[test]
fn worker_log_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w-{id}.log");
    let mut cmd = worker_bin();
    cmd.env.push((WORKER_LOG_ENV.into(), path.display().to_string()));
    let p = WorkerPool::spawn(1, &cmd, Arc::new(GlobalSerializerState::new())).unwrap();
    p.remote_call("poly_square", &[Value::Polynomial(x_plus_one())]).unwrap();
    p.shutdown();
    let log = std::fs::read_to_string(dir.path().join("w-0.log")).unwrap();
    assert!(log.contains("[worker 0]") && log.contains("poly_square"), "{log}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frames_round_trip(seed in any::<u64>(), len in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msgs: Vec<Message> = (0..len).map(|_| arbitrary_message(&mut rng)).collect();
        let stream: Vec<u8> = msgs.iter().flat_map(encode_frame).collect();
        prop_assert_eq!(decode_frames(&stream).unwrap(), msgs);
    }
}
