from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, threads=1):
    """map() that may use worker threads but always returns results in input order."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
