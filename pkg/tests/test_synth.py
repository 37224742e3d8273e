#!/usr/bin/env python
# -*- coding: utf-8 -*-

from collections import Counter

import pytest

from navqagen.errors import ConfigError, PlacementError
from navqagen.scene import validate_house, house_to_dict
from navqagen.synth import SynthConfig, synth_house


def test_single_room_without_objects(lexicon):
    config = SynthConfig(lexicon, grid=(8, 8), rooms=(1, 1), objects_per_room=(0, 0))
    house = synth_house(config, 11)
    assert len(house.rooms) == 1
    assert house.objects == ()
    assert house.doorways == ()
    assert validate_house(house) == []


def test_same_seed_same_house(lexicon):
    config = SynthConfig(lexicon)
    assert house_to_dict(synth_house(config, 42)) == house_to_dict(synth_house(config, 42))
    assert house_to_dict(synth_house(config, 42)) != house_to_dict(synth_house(config, 43))


def test_default_house_id(lexicon):
    assert synth_house(SynthConfig(lexicon), 5).id == 'house_5'
    assert synth_house(SynthConfig(lexicon), 5, house_id='h').id == 'h'


@pytest.mark.parametrize('seed', range(40))
def test_synthesized_houses_are_valid(lexicon, seed):
    config = SynthConfig(lexicon)
    house = synth_house(config, seed)
    assert validate_house(house) == []
    assert config.rooms[0] <= len(house.rooms) <= config.rooms[1]
    for obj in house.objects:
        assert obj.obj_type in lexicon.type_names
        assert obj.color in lexicon.colors
        assert obj.extra_attrs <= set(lexicon.extra_attrs)
        assert len(obj.extra_attrs) <= 1
        assert obj.elevation in (0, 1)


@pytest.mark.slow
def test_validity_sweep_covers_room_range(lexicon):
    config = SynthConfig(lexicon)
    counts = Counter()
    for seed in range(500):
        house = synth_house(config, seed)
        assert validate_house(house) == []
        counts[len(house.rooms)] += 1
    assert set(counts) == set(range(config.rooms[0], config.rooms[1] + 1))


def test_duplicates_are_injected(lexicon):
    config = SynthConfig(lexicon, duplicate_probability=1.0)
    house = synth_house(config, 8)
    signatures = Counter((o.obj_type, o.color, o.extra_attrs) for o in house.objects)
    assert max(signatures.values()) >= 2


@pytest.mark.parametrize('kwargs', [
    dict(rooms=(3, 2)),
    dict(rooms=(0, 2)),
    dict(objects_per_room=(4, 1)),
    dict(grid=(6, 6), rooms=(4, 4)),
    dict(min_room_size=0),
    dict(attr_probabilities={'shiny': 0.5}),
    dict(attr_probabilities={'small': 0.7, 'large': 0.7}),
    dict(elevated_probability=1.5),
    dict(max_attempts=0),
])
def test_bad_configuration(lexicon, kwargs):
    with pytest.raises(ConfigError):
        SynthConfig(lexicon, **kwargs)


def test_from_dict_warns_on_unknown_keys(lexicon, caplog):
    config = SynthConfig.from_dict({'grid': [16, 16], 'rooms': [2, 3], 'floors': 2}, lexicon)
    assert config.grid == (16, 16)
    assert 'synth.floors' in caplog.text
    assert SynthConfig.from_dict(config.to_dict(), lexicon) == config


def test_placement_error_when_layout_never_fits(lexicon, monkeypatch):
    monkeypatch.setattr('navqagen.synth._partition', lambda rng, config, n_rooms: None)
    config = SynthConfig(lexicon, max_attempts=3)
    with pytest.raises(PlacementError):
        synth_house(config, 0)
