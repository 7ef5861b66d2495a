import json

from cycap.core.cache import CacheManager


def test_set_then_get(tmp_path):
    store = CacheManager(cache_dir=tmp_path / "nested", ttl_hours=1)
    assert store.get("timecap:a") is None
    store.set("timecap:a", 0.125)
    assert store.get("timecap:a") == 0.125
    assert store.get("timecap:b") is None


def test_expired_entry_is_dropped(tmp_path):
    store = CacheManager(cache_dir=tmp_path, ttl_hours=1)
    store.set("timecap:old", 0.5)
    (path,) = tmp_path.glob("*.json")
    entry = json.loads(path.read_text(encoding="utf-8"))
    assert entry["key"] == "timecap:old"
    entry["cached_at"] = "2000-01-01T00:00:00"
    path.write_text(json.dumps(entry), encoding="utf-8")

    assert store.get("timecap:old") is None
    assert not path.exists()


def test_corrupt_entry_reads_as_miss(tmp_path):
    store = CacheManager(cache_dir=tmp_path, ttl_hours=1)
    store.set("timecap:x", 1.0)
    (path,) = tmp_path.glob("*.json")
    path.write_text("{not json", encoding="utf-8")
    assert store.get("timecap:x") is None


def test_clear_counts_entries(tmp_path):
    store = CacheManager(cache_dir=tmp_path, ttl_hours=1)
    assert CacheManager(cache_dir=tmp_path / "missing").clear() == 0
    for i in range(3):
        store.set(f"timecap:{i}", i)
    assert store.clear() == 3
    assert store.get("timecap:0") is None
