from importlib.metadata import PackageNotFoundError, version


def toolkit_version() -> str:
    try:
        return version("octane")
    except PackageNotFoundError:
        return "0+unknown"
