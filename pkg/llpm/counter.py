class Counter:
    """
    A plain counter handing out consecutive ids,
    used to number dataflow nodes as they are built
    """

    def __init__(self, starting=0):
        self.count = starting

    def next(self):
        cnt = self.count
        self.count += 1
        return cnt

    def skip_past(self, used_id):
        """Make sure the next id handed out is greater than used_id."""
        self.count = max(self.count, used_id + 1)
