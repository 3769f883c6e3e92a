use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use swarmsearch_core::baselines::random_policy;
use swarmsearch_core::da2c::{collect_batch, compute_returns, train_agent, AgentLearner, TrainConfig};
use swarmsearch_core::nn::{accumulate_actor_grad, accumulate_critic_grad, actor_forward, actor_sizes, critic_sizes};
use swarmsearch_core::seed::rng_from_seed;
use swarmsearch_core::{Action, Mlp, World, WorldConfig};

fn env_step(c: &mut Criterion) {
    let cfg = WorldConfig::default();
    c.bench_function("env_step_3_drones", |b| {
        let mut rng = rng_from_seed(1);
        let (mut world, _) = World::reset(&cfg, 1).unwrap();
        b.iter(|| {
            if world.is_done() {
                world = World::reset(&cfg, 1).unwrap().0;
            }
            // Moves keep the drones mostly inside the arena for longer.
            let actions: Vec<Action> = (0..cfg.n_drones).map(|_| random_policy(&mut rng, false)).collect();
            black_box(world.step(&actions, &mut rng).unwrap());
        })
    });
}

fn networks(c: &mut Criterion) {
    let mut rng = rng_from_seed(2);
    let actor = Mlp::glorot(&actor_sizes(Action::COUNT), &mut rng);
    let critic = Mlp::glorot(&critic_sizes(), &mut rng);
    let obs = [0.5, 0.5, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.5, 0.5, 0.5, 0.5];

    c.bench_function("actor_forward", |b| b.iter(|| black_box(actor_forward(&actor, black_box(&obs)).unwrap())));
    c.bench_function("actor_forward_backward", |b| {
        let mut net = actor.clone();
        b.iter(|| accumulate_actor_grad(&mut net, black_box(&obs), 2, 1.5, 0.001).unwrap())
    });
    c.bench_function("critic_forward_backward", |b| {
        let mut net = critic.clone();
        b.iter(|| accumulate_critic_grad(&mut net, black_box(&obs), 10.0).unwrap())
    });
}

fn learning(c: &mut Criterion) {
    let rewards: Vec<f64> = (0..32).map(|i| if i % 7 == 0 { 900.0 } else { -0.1 }).collect();
    c.bench_function("compute_returns_32", |b| {
        b.iter(|| black_box(compute_returns(black_box(&rewards), false, 12.0, 0.99).unwrap()))
    });

    let world_cfg = WorldConfig::default();
    let cfg = TrainConfig::default();
    let mut rng = rng_from_seed(3);
    let learners: Vec<AgentLearner> = (0..world_cfg.n_drones).map(|i| AgentLearner::new(i, &cfg, &mut rng)).collect();
    let (mut world, mut obs) = World::reset(&world_cfg, 3).unwrap();
    let buffer = collect_batch(&mut world, &mut obs, &learners, cfg.batch_size, &mut rng).unwrap();
    let batch = buffer.agent_batch(0);
    c.bench_function("train_agent_batch_32", |b| {
        b.iter_batched(
            || learners[0].clone(),
            |mut learner| black_box(train_agent(&mut learner, &batch, &cfg).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, env_step, networks, learning);
criterion_main!(benches);
