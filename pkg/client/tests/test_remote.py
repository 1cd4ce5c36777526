import json

import numpy as np
import pytest

from crafterkit_client import ProtocolError, connect


def test_spec(live_server):
    with connect(live_server) as env:
        assert len(env.action_names) == 17
        assert len(env.spec_info["achievements"]) == 22
        assert env.spec_info["frame"] == {"width": 144, "height": 144,
                                          "channels": 3}


def test_step_before_reset_raises(live_server):
    with connect(live_server) as env:
        with pytest.raises(ProtocolError) as e:
            env.step(0)
        assert e.value.code == "NotReset"


def test_bridge_parity_bit_for_bit(live_server, fixtures_dir):
    """Replaying the fixture action script matches native rewards exactly."""
    script = json.loads((fixtures_dir / "bridge_script.json").read_text())
    with connect(live_server) as env:
        env.reset(script["seed"])
        for i, (action, expected) in enumerate(zip(script["actions"],
                                                   script["expected"])):
            _, reward, done, info = env.step(action)
            assert reward == expected["reward"], i   # bit-for-bit float parity
            assert done == expected["done"], i
            assert list(info["unlocked"]) == expected["unlocked"], i
            if done:
                break


def test_render_shape_and_determinism(live_server):
    with connect(live_server) as env:
        env.reset(5)
        a = env.render()
        b = env.render()
        assert a.shape == (144, 144, 3) and a.dtype == np.uint8
        assert (a == b).all()


def test_frames_inline_with_step(live_server):
    with connect(live_server) as env:
        env.reset(1)
        obs, reward, done, info = env.step("move_left", render=True)
        assert obs is not None and obs.shape == (144, 144, 3)


def test_config_and_independent_connections(live_server):
    with connect(live_server) as a, connect(live_server) as b:
        a.reset(9, config={"mobs_enabled": False})
        b.reset(9)
        _, ra, _, _ = a.step(5)
        _, rb, _, _ = b.step(5)
        # same seed, same first action; configs differ but both respond
        assert isinstance(ra, float) and isinstance(rb, float)
