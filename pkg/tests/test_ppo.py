"""PPO: network contracts, GAE, the clipped update, evaluation."""

from __future__ import annotations

import numpy as np
import pytest

from rheacl import gridworld as gw
from rheacl import ppo
from rheacl import tensor as T
from rheacl.ppo import network
from rheacl.ppo.agent import build_loss, normalize_advantages
from rheacl.ppo.buffer import RolloutBuffer, compute_gae
from rheacl.seeding import stream
from rheacl.tensor.adam import adam_step


def random_obs(rng, n):
    return rng.integers(0, 7, size=(n, 5, 5, 3)).astype(np.uint8)


# -- forward ------------------------------------------------------------------


def test_forward_shapes():
    rng = np.random.default_rng(0)
    params = network.init_params(rng)
    logits, values = network.forward_np(params, network.normalize_obs(random_obs(rng, 3)))
    assert logits.shape == (3, 7) and values.shape == (3,)


def test_zero_params_uniform_policy_and_zero_value():
    obs = network.normalize_obs(random_obs(np.random.default_rng(1), 4))
    logits, values = network.forward_np(np.zeros(network.NUM_PARAMS), obs)
    assert np.all(logits == 0.0) and np.all(values == 0.0)
    lsm = network.log_softmax_np(logits)
    assert np.allclose(np.exp(lsm), 1 / 7)


def test_zero_params_entropy_is_ln7_exactly():
    tape = T.Tape()
    logits, _, _ = network.forward_tape(tape, np.zeros(network.NUM_PARAMS),
                                        network.normalize_obs(random_obs(np.random.default_rng(2), 5)))
    ent = T.entropy_last(logits)
    assert np.all(ent.array == np.log(7.0))


def test_softmax_rows_sum_to_one_over_random_params():
    rng = np.random.default_rng(3)
    obs = network.normalize_obs(random_obs(rng, 2))
    for _ in range(1000):
        params = rng.normal(scale=0.5, size=network.NUM_PARAMS)
        logits, _ = network.forward_np(params, obs)
        probs = np.exp(network.log_softmax_np(logits))
        assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-12)


def test_taped_forward_matches_plain_forward_bitwise():
    rng = np.random.default_rng(4)
    params = network.init_params(rng)
    obs = network.normalize_obs(random_obs(rng, 8))
    l1, v1 = network.forward_np(params, obs)
    tape = T.Tape()
    l2, v2, _ = network.forward_tape(tape, params, obs)
    assert np.array_equal(l1, l2.array) and np.array_equal(v1, v2.array)


def test_nonfinite_activation_aborts():
    params = np.full(network.NUM_PARAMS, np.inf)
    obs = network.normalize_obs(random_obs(np.random.default_rng(5), 1))
    with pytest.raises(FloatingPointError):
        network.forward_np(params, obs, tanh_heads=False)


# -- collection ----------------------------------------------------------------


def engine_for(pool, procs, rng, fpp=128):
    return ppo.RolloutEngine(ppo.round_robin(pool), gw.StepBudgetSchedule(),
                             procs, fpp, rng)


def test_collect_counts_frames():
    eng = engine_for([gw.EnvSpec("DoorKey", 6)], 1, stream(0, "env"))
    buf = eng.collect(network.init_params(np.random.default_rng(0)))
    assert buf.num_frames == 128
    assert buf.obs.shape == (128, 1, 5, 5, 3)


def test_round_robin_worker_assignment():
    pool = [gw.EnvSpec("DoorKey", 6), gw.EnvSpec("DoorKey", 8)]
    eng = engine_for(pool, 4, stream(0, "env"), fpp=4)
    sizes = [s.spec.size for s in eng.states]
    assert sizes == [6, 8, 6, 8]


def test_collect_deterministic_under_seeds():
    def one():
        eng = engine_for([gw.EnvSpec("DynamicObstacles", 6)], 2, stream(9, "env"), fpp=32)
        return eng.collect(network.init_params(np.random.default_rng(1)))

    b1, b2 = one(), one()
    for name in ("obs", "actions", "log_probs", "values", "rewards", "dones", "bootstrap"):
        assert np.array_equal(getattr(b1, name), getattr(b2, name)), name


def test_cycle_per_episode_period_matches_roster():
    roster = [gw.EnvSpec("DoorKey", s) for s in (6, 8, 10, 12)]
    sel = ppo.cycle_per_episode(roster)
    for worker in range(3):
        seq = [sel(worker, ep).size for ep in range(8)]
        assert seq[:4] == seq[4:]          # period 4
        assert sorted(seq[:4]) == [6, 8, 10, 12]  # full coverage per window


# -- GAE -----------------------------------------------------------------------


def buffer_from(rewards, values, dones, bootstrap):
    t, p = np.asarray(rewards).shape
    return RolloutBuffer(
        obs=np.zeros((t, p, 5, 5, 3), dtype=np.uint8),
        actions=np.zeros((t, p), dtype=np.int64),
        log_probs=np.zeros((t, p)),
        values=np.asarray(values, dtype=np.float64),
        rewards=np.asarray(rewards, dtype=np.float64),
        dones=np.asarray(dones, dtype=bool),
        bootstrap=np.asarray(bootstrap, dtype=np.float64),
    )


def test_gae_single_terminal_step():
    buf = buffer_from([[0.7]], [[0.2]], [[True]], [5.0])
    compute_gae(buf, discount=0.99, lam=0.95)
    assert buf.advantages[0, 0] == pytest.approx(0.7 - 0.2, abs=1e-15)


def test_gae_lambda_zero_is_td_error():
    rng = np.random.default_rng(6)
    r = rng.normal(size=(6, 2))
    v = rng.normal(size=(6, 2))
    boot = rng.normal(size=2)
    buf = buffer_from(r, v, np.zeros((6, 2), bool), boot)
    compute_gae(buf, discount=0.9, lam=0.0)
    v_next = np.vstack([v[1:], boot[None]])
    td = r + 0.9 * v_next - v
    np.testing.assert_allclose(buf.advantages, td, atol=1e-12)


def test_gae_five_step_hand_trace():
    # Single worker, done at t=2; hand recursion with discount=0.5, lam=0.5.
    r = np.array([[1.0], [0.0], [2.0], [0.5], [1.0]])
    v = np.array([[0.5], [0.25], [1.0], [0.0], [0.5]])
    d = np.array([[False], [False], [True], [False], [False]])
    boot = np.array([0.8])
    buf = buffer_from(r, v, d, boot)
    compute_gae(buf, discount=0.5, lam=0.5)
    g, lam = 0.5, 0.5
    a4 = 1.0 + g * 0.8 - 0.5
    a3 = 0.5 + g * 0.5 - 0.0 + g * lam * a4
    a2 = 2.0 - 1.0
    a1 = 0.0 + g * 1.0 - 0.25 + g * lam * a2
    a0 = 1.0 + g * 0.25 - 0.5 + g * lam * a1
    np.testing.assert_allclose(buf.advantages[:, 0], [a0, a1, a2, a3, a4], atol=1e-12)
    np.testing.assert_allclose(buf.returns, buf.advantages + buf.values, atol=1e-15)


# -- update --------------------------------------------------------------------


def small_agent(seed=0, **kw):
    cfg = ppo.PpoConfig(num_processes=2, frames_per_process=64, batch_size=32, **kw)
    return ppo.PpoAgent(cfg, stream(seed, "init"))


def collected_buffer(agent, seed=0):
    eng = ppo.RolloutEngine(ppo.round_robin([gw.EnvSpec("DoorKey", 6)]),
                            gw.StepBudgetSchedule(), agent.config.num_processes,
                            agent.config.frames_per_process, stream(seed, "env"))
    buf = eng.collect(agent.params)
    compute_gae(buf, agent.config.discount, agent.config.gae_lambda)
    return buf


def test_fresh_buffer_ratio_is_one_and_surrogate_is_minus_mean_advantage():
    agent = small_agent()
    buf = collected_buffer(agent)
    n = buf.num_frames
    adv = normalize_advantages(buf.advantages.reshape(n),
                               agent.config.advantage_std_floor)
    parts = build_loss(agent.params, agent.config, buf.obs.reshape(n, 5, 5, 3),
                       buf.actions.reshape(n), buf.log_probs.reshape(n),
                       adv, buf.returns.reshape(n))
    assert np.allclose(parts["ratio"].array, 1.0, atol=1e-12)
    assert float(parts["policy_loss"].array) == pytest.approx(-adv.mean(), abs=1e-12)


def test_advantage_normalization_contract():
    adv = np.random.default_rng(8).normal(3.0, 7.0, size=4096)
    out = normalize_advantages(adv)
    assert abs(out.mean()) <= 1e-9
    assert abs(out.std() - 1.0) <= 1e-9


def test_loss_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    agent = small_agent()
    buf = collected_buffer(agent)
    n = buf.num_frames
    obs = buf.obs.reshape(n, 5, 5, 3)[:32]
    actions = buf.actions.reshape(n)[:32]
    returns = buf.returns.reshape(n)[:32]
    adv = normalize_advantages(buf.advantages.reshape(n))[:32]
    # Distinct old params keep ratios away from the clip kink at 1.
    logp_old = buf.log_probs.reshape(n)[:32] + rng.normal(scale=0.05, size=32)

    def loss_at(p):
        parts = build_loss(p, agent.config, obs, actions, logp_old, adv, returns)
        return float(parts["loss"].array)

    parts = build_loss(agent.params, agent.config, obs, actions, logp_old, adv, returns)
    parts["tape"].backward(parts["loss"])
    grad = network.flat_grad(parts["leaves"])

    h = 1e-5
    for _ in range(10):
        idx = int(rng.integers(0, network.NUM_PARAMS))
        pp = agent.params.copy()
        pp[idx] += h
        pm = agent.params.copy()
        pm[idx] -= h
        fd = (loss_at(pp) - loss_at(pm)) / (2 * h)
        assert abs(fd - grad[idx]) <= 1e-3 * max(abs(fd), 1e-7)


def test_one_epoch_does_not_worsen_surrogate_statistically():
    # On a frozen buffer, an update should not increase the clipped surrogate.
    wins = 0
    for seed in range(20):
        agent = small_agent(seed=seed, update_epochs=1)
        buf = collected_buffer(agent, seed=seed)
        n = buf.num_frames
        adv = normalize_advantages(buf.advantages.reshape(n),
                                   agent.config.advantage_std_floor)
        args = (buf.obs.reshape(n, 5, 5, 3), buf.actions.reshape(n),
                buf.log_probs.reshape(n), adv, buf.returns.reshape(n))
        before = float(build_loss(agent.params, agent.config, *args)["policy_loss"].array)
        agent.update(buf, stream(seed, "train"))
        after = float(build_loss(agent.params, agent.config, *args)["policy_loss"].array)
        if after <= before + 1e-12:
            wins += 1
    assert wins >= 18, f"surrogate worsened on {20 - wins} of 20 seeds"


def test_unclipped_update_equals_vanilla_policy_gradient():
    # With clip_eps effectively infinite and one epoch, update() must agree
    # with an independently coded unclipped policy-gradient step sequence.
    agent = small_agent(clip_eps=1e9, update_epochs=1)
    buf = collected_buffer(agent)
    n = buf.num_frames
    cfg = agent.config

    ref_params = agent.params.copy()
    ref_adam = agent.adam.copy()
    rng_ref = stream(5, "update")
    flat_obs = buf.obs.reshape(n, 5, 5, 3)
    flat_act = buf.actions.reshape(n)
    flat_logp = buf.log_probs.reshape(n)
    flat_ret = buf.returns.reshape(n)
    adv = normalize_advantages(buf.advantages.reshape(n), cfg.advantage_std_floor)
    order = rng_ref.permutation(n)
    for start in range(0, n, cfg.batch_size):
        idx = order[start:start + cfg.batch_size]
        tape = T.Tape()
        logits, value, leaves = network.forward_tape(
            tape, ref_params, network.normalize_obs(flat_obs[idx]), cfg.tanh_heads)
        lsm = T.log_softmax(logits)
        ratio = T.exp(T.sub(T.take_last(lsm, flat_act[idx]),
                            tape.constant(flat_logp[idx])))
        pg = T.neg(T.mean_all(T.mul(ratio, tape.constant(adv[idx]))))
        vloss = T.mean_all(T.square(T.sub(value, tape.constant(flat_ret[idx]))))
        ent = T.mean_all(T.entropy_last(logits))
        loss = T.add(pg, T.sub(T.scale(vloss, cfg.value_loss_coef),
                               T.scale(ent, cfg.entropy_coef)))
        tape.backward(loss)
        grad = network.flat_grad(leaves)
        norm = float(np.linalg.norm(grad))
        if norm > cfg.max_grad_norm:
            grad *= cfg.max_grad_norm / norm
        ref_params = adam_step(ref_adam, ref_params, grad)

    agent.update(buf, stream(5, "update"))
    np.testing.assert_allclose(agent.params, ref_params, atol=1e-10)


def test_update_rejects_unprepared_buffer():
    agent = small_agent()
    eng = ppo.RolloutEngine(ppo.round_robin([gw.EnvSpec("DoorKey", 6)]),
                            gw.StepBudgetSchedule(), 2, 64, stream(1, "env"))
    buf = eng.collect(agent.params)
    with pytest.raises(ValueError):
        agent.update(buf, stream(1, "u"))


# -- evaluation ------------------------------------------------------------------


def test_untrained_params_on_large_doorkey_score_near_zero():
    sch = gw.StepBudgetSchedule()
    mean = ppo.evaluate(np.zeros(network.NUM_PARAMS), gw.EnvSpec("DoorKey", 12),
                        10, sch, 0, stream(2, "eval"))
    assert abs(mean) <= 0.2


def test_evaluate_deterministic_and_bounded():
    sch = gw.StepBudgetSchedule()
    params = network.init_params(np.random.default_rng(3))
    m1 = ppo.evaluate(params, gw.EnvSpec("DynamicObstacles", 6), 8, sch, 0, stream(4, "e"))
    m2 = ppo.evaluate(params, gw.EnvSpec("DynamicObstacles", 6), 8, sch, 0, stream(4, "e"))
    assert m1 == m2
    assert -1.0 <= m1 <= 1.0


def test_evaluate_uses_decayed_budget():
    sch = gw.StepBudgetSchedule()
    spec = gw.EnvSpec("DoorKey", 6)
    results = ppo.run_episodes(np.zeros(network.NUM_PARAMS), spec, 4,
                               gw.max_steps_for(sch, spec, 3_000_000),
                               stream(5, "e"))
    for res in results:
        assert res.taken_steps <= round(0.15 * spec.default_max_steps)


# -- persistence -----------------------------------------------------------------


def test_snapshot_restore_replays_bitwise():
    agent = small_agent(seed=42)
    snap = agent.snapshot()
    sel = ppo.round_robin([gw.EnvSpec("DoorKey", 6)])
    agent.train_segment(sel, 256, gw.StepBudgetSchedule(), stream(42, "t"))
    first = agent.params.copy()
    agent.restore(snap)
    agent.train_segment(sel, 256, gw.StepBudgetSchedule(), stream(42, "t"))
    assert np.array_equal(agent.params, first)
    assert agent.frames_done == 256


def test_checkpoint_roundtrip(tmp_path):
    agent = small_agent(seed=1)
    agent.train_segment(ppo.round_robin([gw.EnvSpec("DoorKey", 6)]), 128,
                        gw.StepBudgetSchedule(), stream(1, "t"))
    path = tmp_path / "ckpt.npz"
    agent.save(path)
    loaded = ppo.PpoAgent.load(path, agent.config)
    assert np.array_equal(loaded.params, agent.params)
    assert np.array_equal(loaded.adam.m, agent.adam.m)
    assert np.array_equal(loaded.adam.v, agent.adam.v)
    assert loaded.adam.t == agent.adam.t
    assert loaded.frames_done == agent.frames_done
    # Identical behavior after load.
    obs = network.normalize_obs(random_obs(np.random.default_rng(0), 3))
    np.testing.assert_array_equal(network.forward_np(agent.params, obs)[0],
                                  network.forward_np(loaded.params, obs)[0])


def test_config_validation():
    with pytest.raises(ValueError):
        ppo.PpoConfig(clip_eps=1.5).validate()
    with pytest.raises(ValueError):
        ppo.PpoConfig(discount=0.0).validate()
    with pytest.raises(ValueError):
        ppo.PpoConfig(batch_size=300).validate()
    ppo.PpoConfig().validate()
