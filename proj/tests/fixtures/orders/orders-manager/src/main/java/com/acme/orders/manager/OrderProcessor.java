package com.acme.orders.manager;

import com.acme.orders.model.OrderModel;

/**
 * Background worker that consumes queued orders and processes them.
 */
public class OrderProcessor {
    private OrderModel current;
    private long processed;

    public void process(OrderModel order) {
        current = order;
        processed++;
    }
}
